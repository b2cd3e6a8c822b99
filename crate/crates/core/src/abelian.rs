//! Finite abelian groups `∏ Z/n_iZ`, their duals, pairings, subgroups,
//! annihilators and quotients, with exact rational phases in `Q/Z`.
//!
//! Elements and characters are both residue vectors over the same cyclic
//! factors; a character `c` evaluates on `x` as `Σ c_i x_i / n_i mod 1`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cis_turns, C64};

/// Largest group order the enumeration-based operations accept.
pub const MAX_ORDER: u64 = 1_000_000;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: u128, b: u128) -> u128 {
    a / gcd(a, b) * b
}

/// An element of `T = R/Z` with rational value, kept in lowest terms with
/// `0 ≤ numerator < denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPhase {
    numerator: u64,
    denominator: u64,
}

impl RationalPhase {
    pub fn new(numerator: i64, denominator: u64) -> Self {
        assert!(denominator > 0, "phase denominator must be positive");
        Self::from_wide(numerator as i128, denominator as u128)
    }

    fn from_wide(numerator: i128, denominator: u128) -> Self {
        let r = numerator.rem_euclid(denominator as i128) as u128;
        let g = gcd(r, denominator);
        RationalPhase {
            numerator: (r / g) as u64,
            denominator: (denominator / g) as u64,
        }
    }

    pub fn zero() -> Self {
        RationalPhase {
            numerator: 0,
            denominator: 1,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `e^{2πi·value}`.
    pub fn to_complex(&self) -> C64 {
        cis_turns(self.value())
    }
}

impl std::ops::Add for RationalPhase {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        let d = lcm(self.denominator as u128, other.denominator as u128);
        let n = self.numerator as i128 * (d / self.denominator as u128) as i128
            + other.numerator as i128 * (d / other.denominator as u128) as i128;
        Self::from_wide(n, d)
    }
}

impl std::ops::Neg for RationalPhase {
    type Output = Self;

    fn neg(self) -> Self {
        Self::from_wide(-(self.numerator as i128), self.denominator as u128)
    }
}

impl std::ops::Sub for RationalPhase {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        self + -other
    }
}

impl fmt::Display for RationalPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Residue-vector types living over a group's cyclic factors.
pub trait Residues: Clone + Eq + Ord + std::hash::Hash + fmt::Debug {
    fn residues(&self) -> &[u64];
    fn from_residues(residues: Vec<u64>) -> Self;
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    residues: Vec<u64>,
}

/// A character, `x ↦ Σ c_i x_i / n_i mod 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Character {
    residues: Vec<u64>,
}

impl Residues for GroupElement {
    fn residues(&self) -> &[u64] {
        &self.residues
    }
    fn from_residues(residues: Vec<u64>) -> Self {
        GroupElement { residues }
    }
}

impl Residues for Character {
    fn residues(&self) -> &[u64] {
        &self.residues
    }
    fn from_residues(residues: Vec<u64>) -> Self {
        Character { residues }
    }
}

impl GroupElement {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }
}

impl Character {
    pub fn residues(&self) -> &[u64] {
        &self.residues
    }
}

fn fmt_tuple(r: &[u64], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let parts: Vec<String> = r.iter().map(|v| v.to_string()).collect();
    write!(f, "({})", parts.join(","))
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_tuple(&self.residues, f)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_tuple(&self.residues, f)
    }
}

/// `∏ Z/n_iZ` given by its cyclic factors, in the order supplied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    cyclic_orders: Vec<u64>,
    order: u64,
}

impl FiniteAbelianGroup {
    /// Factors of order 1 are kept as trivial factors; order 0 is rejected.
    pub fn new(cyclic_orders: Vec<u64>) -> Result<Self> {
        let mut order: u64 = 1;
        for (i, &n) in cyclic_orders.iter().enumerate() {
            if n == 0 {
                return Err(Error::structural(format!("cyclic factor {i} has order 0")));
            }
            order = order
                .checked_mul(n)
                .filter(|&o| o <= MAX_ORDER)
                .ok_or_else(|| {
                    Error::structural(format!("group order exceeds the cap {MAX_ORDER}"))
                })?;
        }
        Ok(FiniteAbelianGroup {
            cyclic_orders,
            order,
        })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup {
            cyclic_orders: Vec::new(),
            order: 1,
        }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    /// Parses `Z<n>` factors joined by `x`, e.g. `Z4xZ2`.
    pub fn parse(spec: &str) -> Result<Self> {
        let trimmed = spec.trim();
        if trimmed.is_empty() {
            return Err(Error::parse(0, "empty group spec"));
        }
        let offset = spec.len() - spec.trim_start().len();
        let mut orders = Vec::new();
        let mut pos = offset;
        for part in trimmed.split(['x', 'X']) {
            let body = part
                .strip_prefix(['Z', 'z'])
                .ok_or_else(|| Error::parse(pos, format!("expected `Z<n>`, found `{part}`")))?;
            let n: u64 = body.parse().map_err(|_| {
                Error::parse(pos + 1, format!("`{body}` is not a positive integer"))
            })?;
            if n == 0 {
                return Err(Error::parse(
                    pos + 1,
                    "cyclic factor Z0 is not a finite group",
                ));
            }
            orders.push(n);
            pos += part.len() + 1;
        }
        Self::new(orders).map_err(|e| Error::parse(offset, e.to_string()))
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.cyclic_orders
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Order as a `usize`, for sizing vectors and matrices.
    pub fn size(&self) -> usize {
        self.order as usize
    }

    /// Number of cyclic factors.
    pub fn rank(&self) -> usize {
        self.cyclic_orders.len()
    }

    /// Least common multiple of the factor orders; every pairing value has
    /// this as a common denominator.
    pub fn exponent(&self) -> u64 {
        self.cyclic_orders
            .iter()
            .fold(1u128, |acc, &n| lcm(acc, n as u128)) as u64
    }

    fn check_residues(&self, r: &[u64], what: &str) -> Result<()> {
        if r.len() != self.rank() {
            return Err(Error::structural(format!(
                "{what} has {} residues but the group has {} factors",
                r.len(),
                self.rank()
            )));
        }
        for (i, (&v, &n)) in r.iter().zip(&self.cyclic_orders).enumerate() {
            if v >= n {
                return Err(Error::structural(format!(
                    "{what} residue {v} in factor {i} is not below {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn element(&self, residues: &[u64]) -> Result<GroupElement> {
        self.check_residues(residues, "element")?;
        Ok(GroupElement {
            residues: residues.to_vec(),
        })
    }

    pub fn character(&self, residues: &[u64]) -> Result<Character> {
        self.check_residues(residues, "character")?;
        Ok(Character {
            residues: residues.to_vec(),
        })
    }

    /// Reduces arbitrary integers into the factor ranges.
    pub fn reduce<T: Residues>(&self, values: &[i64]) -> Result<T> {
        if values.len() != self.rank() {
            return Err(Error::structural(format!(
                "{} residues supplied for a group with {} factors",
                values.len(),
                self.rank()
            )));
        }
        Ok(T::from_residues(
            values
                .iter()
                .zip(&self.cyclic_orders)
                .map(|(&v, &n)| v.rem_euclid(n as i64) as u64)
                .collect(),
        ))
    }

    pub fn zero<T: Residues>(&self) -> T {
        T::from_residues(vec![0; self.rank()])
    }

    /// The `i`-th standard generator `e_i`.
    pub fn unit<T: Residues>(&self, i: usize) -> T {
        let mut r = vec![0; self.rank()];
        r[i] = 1 % self.cyclic_orders[i];
        T::from_residues(r)
    }

    pub fn is_member<T: Residues>(&self, x: &T) -> bool {
        self.check_residues(x.residues(), "value").is_ok()
    }

    /// Mixed-radix index, first factor most significant (lexicographic order).
    pub fn index_of<T: Residues>(&self, x: &T) -> usize {
        x.residues()
            .iter()
            .zip(&self.cyclic_orders)
            .fold(0usize, |acc, (&r, &n)| acc * n as usize + r as usize)
    }

    pub fn at_index<T: Residues>(&self, mut idx: usize) -> T {
        let mut r = vec![0; self.rank()];
        for i in (0..self.rank()).rev() {
            let n = self.cyclic_orders[i] as usize;
            r[i] = (idx % n) as u64;
            idx /= n;
        }
        T::from_residues(r)
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.size()).map(move |i| self.at_index(i))
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        (0..self.size()).map(move |i| self.at_index(i))
    }

    pub fn add<T: Residues>(&self, a: &T, b: &T) -> T {
        T::from_residues(
            a.residues()
                .iter()
                .zip(b.residues())
                .zip(&self.cyclic_orders)
                .map(|((&x, &y), &n)| (x + y) % n)
                .collect(),
        )
    }

    pub fn neg<T: Residues>(&self, a: &T) -> T {
        T::from_residues(
            a.residues()
                .iter()
                .zip(&self.cyclic_orders)
                .map(|(&x, &n)| (n - x) % n)
                .collect(),
        )
    }

    pub fn sub<T: Residues>(&self, a: &T, b: &T) -> T {
        self.add(a, &self.neg(b))
    }

    pub fn scale<T: Residues>(&self, a: &T, k: i64) -> T {
        T::from_residues(
            a.residues()
                .iter()
                .zip(&self.cyclic_orders)
                .map(|(&x, &n)| ((x as i128 * k as i128).rem_euclid(n as i128)) as u64)
                .collect(),
        )
    }

    /// `Σ a_i b_i / n_i mod 1`; symmetric in its arguments.
    pub(crate) fn pair_residues(&self, a: &[u64], b: &[u64]) -> RationalPhase {
        let l = self.exponent() as u128;
        let mut num: u128 = 0;
        for ((&x, &c), &n) in a.iter().zip(b).zip(&self.cyclic_orders) {
            num = (num + (x as u128 * c as u128 % n as u128) * (l / n as u128)) % l;
        }
        RationalPhase::from_wide(num as i128, l)
    }

    /// Evaluation pairing `χ(x)`.
    pub fn pairing(&self, x: &GroupElement, chi: &Character) -> Result<RationalPhase> {
        self.check_residues(&x.residues, "element")?;
        self.check_residues(&chi.residues, "character")?;
        Ok(self.pair_residues(&x.residues, &chi.residues))
    }

    /// Unchecked pairing for values already known to belong to the group.
    pub fn pair(&self, x: &GroupElement, chi: &Character) -> RationalPhase {
        self.pair_residues(&x.residues, &chi.residues)
    }

    /// Every presentation with non-decreasing factors `≥ 2` and order
    /// `≤ max_order`, starting with the trivial group.
    pub fn all_up_to(max_order: u64) -> Vec<Self> {
        fn rec(min: u64, rem: u64, prefix: &mut Vec<u64>, out: &mut Vec<FiniteAbelianGroup>) {
            for n in min..=rem {
                prefix.push(n);
                out.push(FiniteAbelianGroup::new(prefix.clone()).expect("bounded order"));
                rec(n, rem / n, prefix, out);
                prefix.pop();
            }
        }
        let mut out = vec![Self::trivial()];
        rec(2, max_order, &mut Vec::new(), &mut out);
        out
    }

    /// All subgroups, ordered by first discovery from the trivial subgroup.
    pub fn all_subgroups(&self) -> Vec<Subgroup<GroupElement>> {
        let trivial = Subgroup::trivial(self);
        let mut seen: HashSet<Vec<bool>> = HashSet::new();
        seen.insert(trivial.members.clone());
        let mut out = vec![trivial];
        let mut i = 0;
        while i < out.len() {
            let current = out[i].clone();
            for x in self.elements() {
                if current.contains(&x) {
                    continue;
                }
                let mut gens = current.generators.clone();
                gens.push(x);
                let next = Subgroup::generate(self, gens).expect("valid generators");
                if seen.insert(next.members.clone()) {
                    out.push(next);
                }
            }
            i += 1;
        }
        out
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cyclic_orders.is_empty() {
            return write!(f, "Z1");
        }
        let parts: Vec<String> = self.cyclic_orders.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// A subgroup stored by generators plus its enumerated closure. The parent
/// is the group for elements, or the (same-shaped) dual for characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup<T: Residues> {
    parent: FiniteAbelianGroup,
    generators: Vec<T>,
    elements: Vec<T>,
    members: Vec<bool>,
}

pub type ElementSubgroup = Subgroup<GroupElement>;
pub type CharacterSubgroup = Subgroup<Character>;

impl<T: Residues> Subgroup<T> {
    /// Closure of `generators` under addition.
    pub fn generate(parent: &FiniteAbelianGroup, generators: Vec<T>) -> Result<Self> {
        for g in &generators {
            parent.check_residues(g.residues(), "generator")?;
        }
        let mut members = vec![false; parent.size()];
        let zero: T = parent.zero();
        members[parent.index_of(&zero)] = true;
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = parent.add(&x, g);
                let idx = parent.index_of(&y);
                if !members[idx] {
                    members[idx] = true;
                    queue.push_back(y);
                }
            }
        }
        Ok(Self::from_members(parent, generators, members))
    }

    fn from_members(parent: &FiniteAbelianGroup, generators: Vec<T>, members: Vec<bool>) -> Self {
        let elements = members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| parent.at_index(i))
            .collect();
        Subgroup {
            parent: parent.clone(),
            generators,
            elements,
            members,
        }
    }

    /// Builds a subgroup from a set already known to be closed; generators are
    /// chosen greedily in lexicographic order.
    pub fn from_closed_set(parent: &FiniteAbelianGroup, elements: &[T]) -> Result<Self> {
        let mut members = vec![false; parent.size()];
        for x in elements {
            parent.check_residues(x.residues(), "subgroup element")?;
            members[parent.index_of(x)] = true;
        }
        let zero: T = parent.zero();
        if !members[parent.index_of(&zero)] {
            return Err(Error::structural("set does not contain the identity"));
        }
        for a in elements {
            for b in elements {
                if !members[parent.index_of(&parent.add(a, b))] {
                    return Err(Error::structural("set is not closed under addition"));
                }
            }
        }
        let mut generators: Vec<T> = Vec::new();
        let mut current = Self::trivial(parent);
        for (i, &m) in members.iter().enumerate() {
            if m && !current.members[i] {
                generators.push(parent.at_index(i));
                current = Self::generate(parent, generators.clone())?;
            }
        }
        Ok(Self::from_members(parent, generators, members))
    }

    pub fn trivial(parent: &FiniteAbelianGroup) -> Self {
        Self::generate(parent, Vec::new()).expect("trivial subgroup")
    }

    pub fn whole(parent: &FiniteAbelianGroup) -> Self {
        let gens = (0..parent.rank()).map(|i| parent.unit(i)).collect();
        Self::generate(parent, gens).expect("standard generators")
    }

    pub fn parent(&self) -> &FiniteAbelianGroup {
        &self.parent
    }

    pub fn generators(&self) -> &[T] {
        &self.generators
    }

    /// Elements in lexicographic order.
    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn contains(&self, x: &T) -> bool {
        self.parent.is_member(x) && self.members[self.parent.index_of(x)]
    }

    /// Checks closure, identity and Lagrange; cheap enough for tests.
    pub fn is_valid(&self) -> bool {
        let p = &self.parent;
        self.contains(&p.zero())
            && p.order().is_multiple_of(self.order())
            && self.elements.iter().all(|a| {
                self.contains(&p.neg(a))
                    && self.elements.iter().all(|b| self.contains(&p.add(a, b)))
            })
    }
}

/// `G^⊥`: characters vanishing on `G`. `|G^⊥|·|G| = |E|`.
pub fn annihilator(g: &ElementSubgroup) -> CharacterSubgroup {
    annihilate(g)
}

/// The element-side annihilator of a character subgroup, through the
/// double-dual identification `E ≅ Ê^`.
pub fn annihilator_of_characters(h: &CharacterSubgroup) -> ElementSubgroup {
    annihilate(h)
}

fn annihilate<S: Residues, T: Residues>(sub: &Subgroup<S>) -> Subgroup<T> {
    let p = sub.parent();
    let members: Vec<bool> = (0..p.size())
        .map(|i| {
            let c: T = p.at_index(i);
            sub.generators()
                .iter()
                .all(|g| p.pair_residues(g.residues(), c.residues()).is_zero())
        })
        .collect();
    let elements: Vec<T> = members
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| p.at_index(i))
        .collect();
    Subgroup::from_closed_set(p, &elements).expect("annihilator is a subgroup")
}

/// `x ↦ (χ ↦ χ(x))`, tabulated over all characters in index order.
pub fn double_dual_map(group: &FiniteAbelianGroup, x: &GroupElement) -> Vec<RationalPhase> {
    group.characters().map(|chi| group.pair(x, &chi)).collect()
}

/// True when the evaluation map is injective, hence bijective by counting.
pub fn verify_double_dual(group: &FiniteAbelianGroup) -> bool {
    let rows: HashSet<Vec<RationalPhase>> = group
        .elements()
        .map(|x| double_dual_map(group, &x))
        .collect();
    rows.len() == group.size()
}

/// One representative per coset, the lexicographic minimum, in increasing order.
pub fn coset_representatives<T: Residues>(sub: &Subgroup<T>) -> Vec<T> {
    let p = sub.parent();
    let mut covered = vec![false; p.size()];
    let mut reps = Vec::new();
    for i in 0..p.size() {
        if covered[i] {
            continue;
        }
        let x: T = p.at_index(i);
        for g in sub.elements() {
            covered[p.index_of(&p.add(&x, g))] = true;
        }
        reps.push(x);
    }
    reps
}

/// `A = P/K` realized as a product of cyclic groups with the projection
/// `q: P → A` and a lexicographically minimal section.
#[derive(Debug, Clone)]
pub struct Quotient<T: Residues> {
    kernel: Subgroup<T>,
    target: FiniteAbelianGroup,
    projection: Vec<Vec<i128>>,
    lifts: Vec<T>,
}

impl<T: Residues> Quotient<T> {
    pub fn kernel(&self) -> &Subgroup<T> {
        &self.kernel
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn project(&self, x: &T) -> GroupElement {
        let orders = self.target.cyclic_orders();
        let residues = self
            .projection
            .iter()
            .zip(orders)
            .map(|(row, &d)| {
                let v: i128 = row
                    .iter()
                    .zip(x.residues())
                    .map(|(&u, &r)| u * r as i128)
                    .sum();
                v.rem_euclid(d as i128) as u64
            })
            .collect();
        GroupElement { residues }
    }

    /// Lexicographically minimal element of the coset `a`.
    pub fn lift(&self, a: &GroupElement) -> T {
        self.lifts[self.target.index_of(a)].clone()
    }

    /// `q∘j = 0`, `ker q = im j`, and `q` onto.
    pub fn verify_exactness(&self) -> bool {
        let p = self.kernel.parent();
        let zero: GroupElement = self.target.zero();
        let kernel_maps_to_zero = self
            .kernel
            .elements()
            .iter()
            .all(|g| self.project(g) == zero);
        let mut hit = vec![false; self.target.size()];
        let mut kernel_count = 0;
        for i in 0..p.size() {
            let x: T = p.at_index(i);
            let a = self.project(&x);
            hit[self.target.index_of(&a)] = true;
            if a == zero {
                if !self.kernel.contains(&x) {
                    return false;
                }
                kernel_count += 1;
            }
        }
        kernel_maps_to_zero && kernel_count == self.kernel.order() && hit.iter().all(|&h| h)
    }
}

/// Quotient by a subgroup. The trivial subgroup yields the parent itself with
/// the identity projection; otherwise the cyclic factors come from a diagonal
/// reduction of the relation lattice (factors of order 1 dropped).
pub fn quotient_group<T: Residues>(sub: &Subgroup<T>) -> Quotient<T> {
    let parent = sub.parent();
    let k = parent.rank();
    let (target, projection) = if sub.order() == 1 {
        let proj = (0..k)
            .map(|i| (0..k).map(|j| (i == j) as i128).collect())
            .collect();
        (parent.clone(), proj)
    } else {
        let gens: Vec<Vec<u64>> = sub
            .generators()
            .iter()
            .map(|g| g.residues().to_vec())
            .collect();
        let (diag, u) = diagonal_reduction(parent.cyclic_orders(), &gens);
        let mut orders = Vec::new();
        let mut rows = Vec::new();
        for (d, row) in diag.into_iter().zip(u) {
            if d > 1 {
                rows.push(row.into_iter().map(|v| v.rem_euclid(d as i128)).collect());
                orders.push(d);
            }
        }
        (
            FiniteAbelianGroup::new(orders).expect("quotient order bounded by parent"),
            rows,
        )
    };
    let mut q = Quotient {
        kernel: sub.clone(),
        target,
        projection,
        lifts: Vec::new(),
    };
    let mut lifts: Vec<Option<T>> = vec![None; q.target.size()];
    for rep in coset_representatives(sub) {
        let idx = q.target.index_of(&q.project(&rep));
        lifts[idx] = Some(rep);
    }
    q.lifts = lifts
        .into_iter()
        .map(|l| l.expect("projection is onto"))
        .collect();
    q
}

/// Row-unimodular diagonalization `U·R·V = diag(d)` of the relation matrix
/// `R = [diag(n) | generators]`. Returns `d` and the rows of `U`; the map
/// `x ↦ (U x)_t mod d_t` identifies `Z^k / col(R)` with `⊕ Z/d_t`.
// row operations read row t while writing row i of the same matrix
#[allow(clippy::needless_range_loop)]
fn diagonal_reduction(orders: &[u64], gens: &[Vec<u64>]) -> (Vec<u64>, Vec<Vec<i128>>) {
    let k = orders.len();
    let cols = k + gens.len();
    let mut a: Vec<Vec<i128>> = (0..k)
        .map(|i| {
            let mut row = vec![0i128; cols];
            row[i] = orders[i] as i128;
            for (j, g) in gens.iter().enumerate() {
                row[k + j] = g[i] as i128;
            }
            row
        })
        .collect();
    let mut u: Vec<Vec<i128>> = (0..k)
        .map(|i| (0..k).map(|j| (i == j) as i128).collect())
        .collect();
    let mut diag = Vec::with_capacity(k);
    for t in 0..k {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..cols {
                    if a[i][j] != 0 && pivot.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                break;
            };
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..k {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in 0..cols {
                        a[i][j] -= q * a[t][j];
                    }
                    for j in 0..k {
                        u[i][j] -= q * u[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if clean {
                break;
            }
        }
        if a[t][t] < 0 {
            a[t].iter_mut().for_each(|v| *v = -*v);
            u[t].iter_mut().for_each(|v| *v = -*v);
        }
        diag.push(a[t][t] as u64);
    }
    (diag, u)
}

/// Parses a bracketed generator list such as `[(2,0),(1,1)]`; bare integers
/// are accepted as one-tuples, so `[2]` works for cyclic groups.
pub fn parse_subgroup(group: &FiniteAbelianGroup, spec: &str) -> Result<ElementSubgroup> {
    let tuples = parse_tuple_list(spec)?;
    let mut gens = Vec::new();
    for (pos, t) in tuples {
        let residues: Vec<u64> = t.iter().map(|&v| v as u64).collect();
        if t.iter().any(|&v| v < 0) {
            return Err(Error::parse(pos, "negative residue"));
        }
        let g = group
            .element(&residues)
            .map_err(|e| Error::parse(pos, e.to_string()))?;
        gens.push(g);
    }
    Subgroup::generate(group, gens)
}

fn parse_tuple_list(spec: &str) -> Result<Vec<(usize, Vec<i64>)>> {
    let bytes: Vec<char> = spec.chars().collect();
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < bytes.len() && bytes[*i].is_whitespace() {
            *i += 1;
        }
    };
    let number = |i: &mut usize| -> Result<i64> {
        let start = *i;
        if *i < bytes.len() && bytes[*i] == '-' {
            *i += 1;
        }
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        let s: String = bytes[start..*i].iter().collect();
        s.parse()
            .map_err(|_| Error::parse(start, "expected an integer"))
    };
    skip_ws(&mut i);
    if i >= bytes.len() || bytes[i] != '[' {
        return Err(Error::parse(i, "expected `[`"));
    }
    i += 1;
    let mut out = Vec::new();
    skip_ws(&mut i);
    if i < bytes.len() && bytes[i] == ']' {
        i += 1;
    } else {
        loop {
            skip_ws(&mut i);
            let start = i;
            let tuple = if i < bytes.len() && bytes[i] == '(' {
                i += 1;
                let mut vals = Vec::new();
                skip_ws(&mut i);
                if i < bytes.len() && bytes[i] == ')' {
                    i += 1;
                } else {
                    loop {
                        skip_ws(&mut i);
                        vals.push(number(&mut i)?);
                        skip_ws(&mut i);
                        match bytes.get(i) {
                            Some(',') => i += 1,
                            Some(')') => {
                                i += 1;
                                break;
                            }
                            _ => return Err(Error::parse(i, "expected `,` or `)`")),
                        }
                    }
                }
                vals
            } else {
                vec![number(&mut i)?]
            };
            out.push((start, tuple));
            skip_ws(&mut i);
            match bytes.get(i) {
                Some(',') => i += 1,
                Some(']') => {
                    i += 1;
                    break;
                }
                _ => return Err(Error::parse(i, "expected `,` or `]`")),
            }
        }
    }
    skip_ws(&mut i);
    if i != bytes.len() {
        return Err(Error::parse(i, "trailing input after `]`"));
    }
    Ok(out)
}
