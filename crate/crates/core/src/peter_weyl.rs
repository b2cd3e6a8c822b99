//! Joint eigenspaces `H_{η,a}` of the commuting pair `(G, G^⊥)`.
//!
//! For a subgroup `G ≤ E` the index set is `Ĝ × A` with `A = E/G`. The dual
//! `Ĝ` is realized as `Ê/G^⊥`, so `ĵ` (restriction of characters to `G`) is
//! the projection of that quotient and `η(g) = χ(g)` for any lift `χ` of `η`.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::{
    annihilator, quotient_group, Character, CharacterSubgroup, ElementSubgroup, FiniteAbelianGroup,
    GroupElement, Quotient,
};
use crate::action::{HeisenbergAction, RELATION_TOL};
use crate::error::{Error, Result};
use crate::numerics::{diff_max, identity_defect, range_basis, CMatrix, C64};

/// Rank cutoff, relative to `max(σ_max, 1)`.
pub const RANK_CUTOFF: f64 = 1e-8;
pub const STRUCTURE_TOL: f64 = 1e-10;
pub const PERMUTATION_TOL: f64 = 1e-9;

/// `G`, `G^⊥`, `A = E/G` with `q`, and `Ĝ = Ê/G^⊥` with `ĵ`.
#[derive(Debug, Clone)]
pub struct SubgroupDuality {
    group: FiniteAbelianGroup,
    subgroup: ElementSubgroup,
    annihilator: CharacterSubgroup,
    quotient: Quotient<GroupElement>,
    restriction: Quotient<Character>,
}

impl SubgroupDuality {
    pub fn new(subgroup: &ElementSubgroup) -> Self {
        let annihilator = annihilator(subgroup);
        SubgroupDuality {
            group: subgroup.parent().clone(),
            subgroup: subgroup.clone(),
            quotient: quotient_group(subgroup),
            restriction: quotient_group(&annihilator),
            annihilator,
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn subgroup(&self) -> &ElementSubgroup {
        &self.subgroup
    }

    pub fn annihilator(&self) -> &CharacterSubgroup {
        &self.annihilator
    }

    /// `A = E/G`.
    pub fn quotient_group(&self) -> &FiniteAbelianGroup {
        self.quotient.target()
    }

    /// `Ĝ`, as `Ê/G^⊥`.
    pub fn subgroup_dual(&self) -> &FiniteAbelianGroup {
        self.restriction.target()
    }

    pub fn q(&self, x: &GroupElement) -> GroupElement {
        self.quotient.project(x)
    }

    /// `ĵ(χ) = χ|_G`.
    pub fn j_hat(&self, chi: &Character) -> GroupElement {
        self.restriction.project(chi)
    }

    /// `η(g)` for `g ∈ G`.
    pub fn eta_at(&self, eta: &GroupElement, g: &GroupElement) -> crate::abelian::RationalPhase {
        self.group.pair(g, &self.restriction.lift(eta))
    }

    /// `ξ(a)` for `ξ ∈ G^⊥`.
    pub fn xi_at(&self, xi: &Character, a: &GroupElement) -> crate::abelian::RationalPhase {
        self.group.pair(&self.quotient.lift(a), xi)
    }

    /// All indices, `η` major, each factor in index order.
    pub fn indices(&self) -> Vec<EigenIndex> {
        let gd = self.subgroup_dual();
        let a = self.quotient_group();
        gd.elements()
            .flat_map(|eta| {
                a.elements().map(move |a| EigenIndex {
                    eta: eta.clone(),
                    a,
                })
            })
            .collect()
    }

    pub fn position(&self, idx: &EigenIndex) -> usize {
        self.subgroup_dual().index_of(&idx.eta) * self.quotient_group().size()
            + self.quotient_group().index_of(&idx.a)
    }

    /// `(η, a) ↦ (η − ĵ(χ), a + q(x))`: where `ρ(T_xM_χ)` sends `H_{η,a}`.
    pub fn index_action(&self, x: &GroupElement, chi: &Character, idx: &EigenIndex) -> EigenIndex {
        EigenIndex {
            eta: self.subgroup_dual().sub(&idx.eta, &self.j_hat(chi)),
            a: self.quotient_group().add(&idx.a, &self.q(x)),
        }
    }

    /// Size of the orbit of `(0,0)` under the generators of `E × Ê`.
    pub fn orbit_size(&self) -> usize {
        let n = self.group.size();
        let mut seen = vec![false; n];
        let start = EigenIndex {
            eta: self.subgroup_dual().zero(),
            a: self.quotient_group().zero(),
        };
        seen[self.position(&start)] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(idx) = queue.pop_front() {
            for (x, chi) in self.generator_pairs() {
                let next = self.index_action(&x, &chi, &idx);
                let p = self.position(&next);
                if !seen[p] {
                    seen[p] = true;
                    count += 1;
                    queue.push_back(next);
                }
            }
        }
        count
    }

    /// `(e_i, 0)` and `(0, e_i)` for every cyclic factor.
    pub fn generator_pairs(&self) -> Vec<(GroupElement, Character)> {
        let g = &self.group;
        let mut out: Vec<(GroupElement, Character)> =
            (0..g.rank()).map(|i| (g.unit(i), g.zero())).collect();
        out.extend((0..g.rank()).map(|i| (g.zero(), g.unit(i))));
        out
    }
}

/// An eigencharacter pair `(η, a) ∈ Ĝ × A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EigenIndex {
    pub eta: GroupElement,
    pub a: GroupElement,
}

impl fmt::Display for EigenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(η={}, a={})", self.eta, self.a)
    }
}

/// Averaging operators for `G` and `G^⊥`, precomputed once per action.
struct Averages {
    on_g: Vec<CMatrix>,
    on_perp: Vec<CMatrix>,
}

fn averages(rho: &HeisenbergAction, duality: &SubgroupDuality) -> Averages {
    let d = rho.dim();
    let us: Vec<CMatrix> = duality
        .subgroup()
        .elements()
        .iter()
        .map(|g| rho.translation(g))
        .collect();
    let vs: Vec<CMatrix> = duality
        .annihilator()
        .elements()
        .iter()
        .map(|xi| rho.modulation(xi))
        .collect();
    let wg = C64::new(1.0 / us.len() as f64, 0.0);
    let wp = C64::new(1.0 / vs.len() as f64, 0.0);
    let on_g = duality
        .subgroup_dual()
        .elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|eta| {
            let mut p = CMatrix::zeros(d, d);
            for (g, u) in duality.subgroup().elements().iter().zip(&us) {
                p += u * ((-duality.eta_at(eta, g)).to_complex() * wg);
            }
            p
        })
        .collect();
    let on_perp = duality
        .quotient_group()
        .elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|a| {
            let mut p = CMatrix::zeros(d, d);
            for (xi, v) in duality.annihilator().elements().iter().zip(&vs) {
                p += v * ((-duality.xi_at(xi, a)).to_complex() * wp);
            }
            p
        })
        .collect();
    Averages { on_g, on_perp }
}

impl Averages {
    fn projector(&self, duality: &SubgroupDuality, idx: &EigenIndex) -> CMatrix {
        let pg = &self.on_g[duality.subgroup_dual().index_of(&idx.eta)];
        let pa = &self.on_perp[duality.quotient_group().index_of(&idx.a)];
        pg * pa
    }
}

fn check_subgroup(rho: &HeisenbergAction, subgroup: &ElementSubgroup) -> Result<()> {
    if subgroup.parent() != rho.group() {
        return Err(Error::Shape(format!(
            "subgroup of {:?} used with an action of {:?}",
            subgroup.parent().cyclic_orders(),
            rho.group().cyclic_orders()
        )));
    }
    Ok(())
}

/// `P_{η,a} = (1/|G||G^⊥|) Σ_{g,ξ} e^{−2πi(η(g)+ξ(a))} ρ(T_g)ρ(M_ξ)`.
pub fn eigenprojector(
    rho: &HeisenbergAction,
    subgroup: &ElementSubgroup,
    idx: &EigenIndex,
) -> Result<CMatrix> {
    check_subgroup(rho, subgroup)?;
    rho.validate(RELATION_TOL)?;
    let duality = SubgroupDuality::new(subgroup);
    if !duality.subgroup_dual().is_member(&idx.eta) || !duality.quotient_group().is_member(&idx.a) {
        return Err(Error::structural(format!("index {idx} outside Ĝ × A")));
    }
    Ok(averages(rho, &duality).projector(&duality, idx))
}

#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub index: EigenIndex,
    pub projector: CMatrix,
    /// Orthonormal columns spanning the range of `projector`.
    pub basis: CMatrix,
}

impl Eigenspace {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Debug, Clone)]
pub struct EigenspaceDecomposition {
    duality: SubgroupDuality,
    dim: usize,
    spaces: Vec<Eigenspace>,
}

/// Validates `ρ` and decomposes it.
pub fn decompose(
    rho: &HeisenbergAction,
    subgroup: &ElementSubgroup,
) -> Result<EigenspaceDecomposition> {
    check_subgroup(rho, subgroup)?;
    rho.validate(RELATION_TOL)?;
    decompose_unchecked(rho, subgroup)
}

/// Decomposition without validating the relations; the invariants then
/// report whatever goes wrong.
pub fn decompose_unchecked(
    rho: &HeisenbergAction,
    subgroup: &ElementSubgroup,
) -> Result<EigenspaceDecomposition> {
    check_subgroup(rho, subgroup)?;
    let duality = SubgroupDuality::new(subgroup);
    let avg = averages(rho, &duality);
    let spaces = duality
        .indices()
        .into_par_iter()
        .map(|index| {
            let projector = avg.projector(&duality, &index);
            let basis = range_basis(&projector, RANK_CUTOFF, 1.0);
            Eigenspace {
                index,
                projector,
                basis,
            }
        })
        .collect();
    Ok(EigenspaceDecomposition {
        duality,
        dim: rho.dim(),
        spaces,
    })
}

impl EigenspaceDecomposition {
    pub fn duality(&self) -> &SubgroupDuality {
        &self.duality
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spaces(&self) -> &[Eigenspace] {
        &self.spaces
    }

    pub fn get(&self, idx: &EigenIndex) -> &Eigenspace {
        &self.spaces[self.duality.position(idx)]
    }

    /// `H_{0,0}`.
    pub fn base_space(&self) -> &Eigenspace {
        &self.spaces[0]
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.rank()).collect()
    }

    pub fn equal_ranks(&self) -> bool {
        let r = self.ranks();
        r.iter().all(|&x| x == r[0])
    }

    pub fn total_rank(&self) -> usize {
        self.ranks().iter().sum()
    }

    /// `‖Σ P − I‖_max`.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for s in &self.spaces {
            sum += &s.projector;
        }
        identity_defect(&sum)
    }

    /// `max(‖P² − P‖, ‖P* − P‖)` over all projectors.
    pub fn projector_defect(&self) -> f64 {
        self.spaces
            .par_iter()
            .map(|s| {
                let p = &s.projector;
                diff_max(&(p * p), p).max(diff_max(&p.adjoint(), p))
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max ‖P P′‖` over distinct pairs.
    pub fn cross_defect(&self) -> f64 {
        let n = self.spaces.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                ((i + 1)..n)
                    .map(|j| {
                        let prod = &self.spaces[i].projector * &self.spaces[j].projector;
                        crate::numerics::norm_max(&prod)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn to_json(&self, include_bases: bool) -> Value {
        let spaces: Vec<Value> = self
            .spaces
            .iter()
            .map(|s| {
                let mut v = json!({
                    "eta": s.index.eta.residues(),
                    "a": s.index.a.residues(),
                    "rank": s.rank(),
                });
                if include_bases {
                    v["basis"] = matrix_json(&s.basis);
                }
                v
            })
            .collect();
        json!({
            "group": self.duality.group().cyclic_orders(),
            "subgroup": self
                .duality
                .subgroup()
                .generators()
                .iter()
                .map(|g| g.residues().to_vec())
                .collect::<Vec<_>>(),
            "dim": self.dim,
            "eigenspaces": spaces,
        })
    }
}

/// Columns as lists of `[re, im]`.
pub(crate) fn matrix_json(m: &CMatrix) -> Value {
    let cols: Vec<Vec<[f64; 2]>> = m
        .column_iter()
        .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    json!(cols)
}

#[derive(Debug, Clone, Serialize)]
pub struct PermutationReport {
    pub max_defect: f64,
    /// `(x, χ, η, a)` of the worst check when it exceeds tolerance.
    pub offending: Option<String>,
    pub ranks: Vec<usize>,
    pub equal_ranks: bool,
    pub orbit_size: usize,
    pub index_count: usize,
    pub passed: bool,
}

/// Checks `ρ(T_xM_χ) P_{η,a} ρ(T_xM_χ)* = P_{index_action}` on generators,
/// equal ranks and transitivity of the index action.
pub fn verify_subspace_permutation(
    rho: &HeisenbergAction,
    decomposition: &EigenspaceDecomposition,
) -> PermutationReport {
    let duality = decomposition.duality();
    let mut worst = (0.0f64, None);
    for (x, chi) in duality.generator_pairs() {
        let op = rho.translation(&x) * rho.modulation(&chi);
        let op_adj = op.adjoint();
        for s in decomposition.spaces() {
            let target = duality.index_action(&x, &chi, &s.index);
            let moved = &op * &s.projector * &op_adj;
            let d = diff_max(&moved, &decomposition.get(&target).projector);
            if d > worst.0 || (d.is_nan() && worst.1.is_none()) {
                worst = (
                    d,
                    Some(format!(
                        "x={x}, χ={chi}, η={}, a={}",
                        s.index.eta, s.index.a
                    )),
                );
            }
        }
    }
    let ranks = decomposition.ranks();
    let equal_ranks = decomposition.equal_ranks() && ranks[0] > 0;
    let orbit_size = duality.orbit_size();
    let index_count = decomposition.spaces().len();
    let ok_defect = worst.0 <= PERMUTATION_TOL;
    PermutationReport {
        max_defect: worst.0,
        offending: if ok_defect { None } else { worst.1 },
        ranks,
        equal_ranks,
        orbit_size,
        index_count,
        passed: ok_defect && equal_ranks && orbit_size == index_count,
    }
}
