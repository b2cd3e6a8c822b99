//! `L²(E × ℝⁿ) = L²(E) ⊗ L²(ℝⁿ)` with the finite group standing in for the
//! compact-open part and the grid model for `ℝⁿ`.
//!
//! Tensor legs are ordered (finite ⊗ grid): the index of `δ_x ⊗ e_j` is
//! `pos(x)·Nⁿ + j`. A product action is one [`HeisenbergAction`] over
//! `E × (Z/N)ⁿ`, finite factors first, so the cross-commutation of the two
//! Heisenberg groups is part of its relations.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::{ElementSubgroup, FiniteAbelianGroup, Residues};
use crate::action::HeisenbergAction;
use crate::error::{Error, Result};
use crate::heisenberg::{CanonicalRep, HeisenbergElement};
use crate::intertwiner::{canonical_coset_basis, AlphaDefects};
use crate::numerics::{
    diff_max, identity_defect, kron, norm_max, numerical_rank, CMatrix, CVector, C64,
};
use crate::peter_weyl::{decompose, EigenIndex};
use crate::weyl::{
    grid_gaussian, real_intertwiner_synth, GridAction, GridSpec, PhasePoint, REAL_TOL,
};

/// Cross-commutation tolerance for product actions.
pub const PRODUCT_RELATION_TOL: f64 = 1e-9;
/// Relative cutoff for the orbit-span rank.
pub const ORBIT_RANK_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ProductModel {
    subgroup: ElementSubgroup,
    grid: GridSpec,
}

impl ProductModel {
    pub fn new(subgroup: ElementSubgroup, grid: GridSpec) -> Self {
        ProductModel { subgroup, grid }
    }

    pub fn finite_group(&self) -> &FiniteAbelianGroup {
        self.subgroup.parent()
    }

    pub fn subgroup(&self) -> &ElementSubgroup {
        &self.subgroup
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn finite_rank(&self) -> usize {
        self.finite_group().rank()
    }

    pub fn dim(&self) -> usize {
        self.finite_group().size() * self.grid.spatial_len()
    }

    /// `E × (Z/N)ⁿ`.
    pub fn product_group(&self) -> FiniteAbelianGroup {
        let mut orders = self.finite_group().cyclic_orders().to_vec();
        orders.extend(std::iter::repeat_n(self.grid.points as u64, self.grid.n));
        FiniteAbelianGroup::new(orders).expect("valid product orders")
    }

    /// Generators `U_E ⊗ I`, `I ⊗ U`, and likewise for modulations, with the
    /// grid's own modulations.
    pub fn canonical_action(&self) -> HeisenbergAction {
        let fin = HeisenbergAction::canonical(self.finite_group());
        let grid = GridAction::canonical(&self.grid);
        let i_e = CMatrix::identity(fin.dim(), fin.dim());
        let i_g = CMatrix::identity(grid.dim(), grid.dim());
        let lift = |f: &[CMatrix], g: &[CMatrix]| -> Vec<CMatrix> {
            f.iter()
                .map(|a| kron(a, &i_g))
                .chain(g.iter().map(|b| kron(&i_e, b)))
                .collect()
        };
        HeisenbergAction::new_unchecked(
            self.product_group(),
            lift(
                fin.translation_generators(),
                grid.action().translation_generators(),
            ),
            lift(
                fin.modulation_generators(),
                grid.action().modulation_generators(),
            ),
        )
        .expect("product shapes")
    }

    /// `ρ_E(h_E) ⊗ W_k`.
    pub fn tensor_action(&self, h: &HeisenbergElement, k: &PhasePoint) -> Result<CMatrix> {
        let rep = CanonicalRep::new(self.finite_group().clone());
        if !self.finite_group().is_member(&h.x) {
            return Err(Error::Shape(format!(
                "{:?} is not an element of E",
                h.x.residues()
            )));
        }
        Ok(kron(
            &rep.heisenberg_matrix(h),
            &crate::weyl::weyl_operator(&self.grid, k)?,
        ))
    }

    fn check(&self, rho: &HeisenbergAction) -> Result<()> {
        if rho.group() != &self.product_group() {
            return Err(Error::Shape(format!(
                "action of {:?}, expected {:?}",
                rho.group().cyclic_orders(),
                self.product_group().cyclic_orders()
            )));
        }
        rho.validate(PRODUCT_RELATION_TOL)
    }

    fn finite_factor(&self, rho: &HeisenbergAction) -> HeisenbergAction {
        rho.factor_action(0..self.finite_rank())
    }

    fn grid_factor(&self, rho: &HeisenbergAction) -> HeisenbergAction {
        let r = self.finite_rank();
        rho.factor_action(r..r + self.grid.n)
    }
}

/// Largest `‖ab − ba‖` between a finite-factor and a grid-factor generator.
pub fn cross_commutation_defect(model: &ProductModel, rho: &HeisenbergAction) -> f64 {
    let fin = model.finite_factor(rho);
    let grid = model.grid_factor(rho);
    let mut worst: f64 = 0.0;
    for (_, a) in fin.generators() {
        for (_, b) in grid.generators() {
            worst = worst.max(diff_max(&(a * b), &(b * a)));
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub eta: Vec<u64>,
    pub a: Vec<u64>,
    pub dim: usize,
    /// Copies of the grid canonical action inside the block.
    pub multiplicity: usize,
    /// Largest defect of the synthesized equivalence.
    pub witness_defect: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<BlockReport>,
    /// Orthonormal basis of each block, in the order of `blocks`.
    pub bases: Vec<CMatrix>,
    pub expected_blocks: usize,
    pub expected_dim: usize,
    pub cross_defect: f64,
}

impl BlockDecomposition {
    pub fn equal_dims(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == self.blocks[0].dim)
    }

    pub fn max_witness_defect(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.witness_defect))
    }

    pub fn passed(&self) -> bool {
        self.blocks.len() == self.expected_blocks
            && self.equal_dims()
            && self.blocks.iter().all(|b| b.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "count": self.blocks.len(),
            "expected_count": self.expected_blocks,
            "expected_dim": self.expected_dim,
            "cross_commutation_defect": self.cross_defect,
            "blocks": self.blocks,
        })
    }
}

/// Splits the space into the joint eigenspaces of the finite factor and
/// checks each as a representation of the grid Heisenberg group.
pub fn block_decompose(model: &ProductModel, rho: &HeisenbergAction) -> Result<BlockDecomposition> {
    model.check(rho)?;
    let fin = model.finite_factor(rho);
    let dec = decompose(&fin, &model.subgroup)?;
    let copies = rho.dim() / model.dim().max(1);
    let expected_dim = model.grid.spatial_len() * copies;
    let grid_part = model.grid_factor(rho);
    let results: Vec<(BlockReport, CMatrix)> = dec
        .spaces()
        .par_iter()
        .map(|space| -> Result<(BlockReport, CMatrix)> {
            let EigenIndex { eta, a } = &space.index;
            let basis = space.basis.clone();
            let mut report = BlockReport {
                eta: eta.residues().to_vec(),
                a: a.residues().to_vec(),
                dim: basis.ncols(),
                multiplicity: 0,
                witness_defect: f64::INFINITY,
                passed: false,
            };
            if basis.ncols() > 0 {
                let restricted = GridAction::new(&model.grid, grid_part.restrict(&basis))?;
                let witness = real_intertwiner_synth(&restricted)?;
                report.multiplicity = witness.multiplicity;
                report.witness_defect = witness.max_defect();
                report.passed = witness.passed()
                    && report.dim == expected_dim
                    && witness.multiplicity * model.grid.spatial_len() == report.dim;
            }
            Ok((report, basis))
        })
        .collect::<Result<_>>()?;
    let (blocks, bases) = results.into_iter().unzip();
    if dec.spaces().iter().any(|s| s.rank() != expected_dim) {
        return Err(Error::Hypothesis(format!(
            "block dimensions {:?} are not all {expected_dim}",
            dec.ranks()
        )));
    }
    Ok(BlockDecomposition {
        blocks,
        bases,
        expected_blocks: model.finite_group().size(),
        expected_dim,
        cross_defect: cross_commutation_defect(model, rho),
    })
}

#[derive(Debug, Clone)]
pub struct CombinedDecomposition {
    pub multiplicity: usize,
    /// `W_α`, each `dim × |E|Nⁿ`.
    pub intertwiners: Vec<CMatrix>,
    pub per_alpha: Vec<AlphaDefects>,
    pub orthogonality_defect: f64,
    pub completeness_defect: f64,
    /// Defect of the grid decomposition of `H_{0,0}`.
    pub base_block_defect: f64,
    pub tolerance: f64,
}

impl CombinedDecomposition {
    pub fn max_defect(&self) -> f64 {
        self.per_alpha
            .iter()
            .flat_map(|a| [a.isometry_defect, a.equivariance_defect])
            .chain([self.orthogonality_defect, self.completeness_defect])
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_defect() <= self.tolerance
    }

    pub fn to_json(&self) -> Value {
        json!({
            "multiplicity": self.multiplicity,
            "per_alpha": self.per_alpha,
            "orthogonality_defect": self.orthogonality_defect,
            "completeness_defect": self.completeness_defect,
            "base_block_defect": self.base_block_defect,
            // ⊕H^α = H rests on completeness_defect, not on a proof
            "exhaustion": "numerical",
        })
    }
}

/// `W_α(T_xM_χ δ_G ⊗ W_kφ) = ρ(T_xM_χ)ρ(W_k)v_α` with `v_α` from the grid
/// decomposition of `H_{0,0}`: on the coset basis,
/// `W_α = Σ_{x,χ} ρ(T_xM_χ) B W⁰_α (c_{x,χ}* ⊗ I)`.
pub fn combined_intertwiner(
    model: &ProductModel,
    rho: &HeisenbergAction,
) -> Result<CombinedDecomposition> {
    model.check(rho)?;
    let d = rho.dim();
    let e_size = model.finite_group().size();
    let g_len = model.grid.spatial_len();
    let fin = model.finite_factor(rho);
    let dec = decompose(&fin, &model.subgroup)?;
    let base = &dec.base_space().basis;
    if base.ncols() == 0 {
        return Err(Error::Hypothesis("H_{0,0} is zero".into()));
    }
    let restricted = GridAction::new(&model.grid, model.grid_factor(rho).restrict(base))?;
    let grid_dec = real_intertwiner_synth(&restricted)?;
    let m = grid_dec.multiplicity;
    if m * g_len * e_size != d {
        return Err(Error::Hypothesis(format!(
            "H_{{0,0}} carries {m} grid copies, but dim {d} ≠ {m}·|E|·Nⁿ"
        )));
    }
    let (labels, coset) = canonical_coset_basis(dec.duality());
    let ops: Vec<CMatrix> = labels
        .iter()
        .map(|(x, chi)| {
            rho.translation(&lift(model, x.residues()))
                * rho.modulation(&lift(model, chi.residues()))
        })
        .collect();
    let canon = model.canonical_action();
    let pairs: Vec<(CMatrix, AlphaDefects)> = grid_dec
        .intertwiners
        .par_iter()
        .map(|w0| {
            let bw = base * w0;
            let mut w = CMatrix::zeros(d, e_size * g_len);
            for (label, op) in ops.iter().enumerate() {
                let image = op * &bw;
                for e in 0..e_size {
                    let c = coset[(e, label)].conj();
                    if c != C64::new(0.0, 0.0) {
                        let mut view = w.view_mut((0, e * g_len), (d, g_len));
                        view += &image * c;
                    }
                }
            }
            let isometry_defect = identity_defect(&(w.adjoint() * &w));
            let equivariance_defect = rho
                .generators()
                .iter()
                .zip(canon.generators())
                .map(|((_, g), (_, c))| diff_max(&(*g * &w), &(&w * c)))
                .fold(0.0, f64::max);
            (
                w,
                AlphaDefects {
                    isometry_defect,
                    equivariance_defect,
                },
            )
        })
        .collect();
    let (intertwiners, per_alpha): (Vec<CMatrix>, Vec<AlphaDefects>) = pairs.into_iter().unzip();
    let mut orthogonality_defect: f64 = 0.0;
    let mut sum = CMatrix::zeros(d, d);
    for (i, wa) in intertwiners.iter().enumerate() {
        sum += wa * wa.adjoint();
        for wb in &intertwiners[i + 1..] {
            orthogonality_defect = orthogonality_defect.max(norm_max(&(wa.adjoint() * wb)));
        }
    }
    Ok(CombinedDecomposition {
        multiplicity: m,
        intertwiners,
        per_alpha,
        orthogonality_defect,
        completeness_defect: identity_defect(&sum),
        base_block_defect: grid_dec.max_defect(),
        tolerance: REAL_TOL,
    })
}

/// An element or character of `E` inside `E × (Z/N)ⁿ`.
fn lift<T: Residues>(model: &ProductModel, r: &[u64]) -> T {
    let mut r = r.to_vec();
    r.extend(std::iter::repeat_n(0, model.grid.n));
    T::from_residues(r)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSpan {
    pub vectors: usize,
    pub rank: usize,
    pub expected: usize,
    pub spans: bool,
}

/// Numerical rank of `{T_xM_χ δ_G ⊗ W_kφ}` over all of `E × Ê` and the
/// phase-space window, through its frame operator.
pub fn orbit_span(model: &ProductModel) -> Result<OrbitSpan> {
    let e = model.finite_group();
    let rep = CanonicalRep::new(e.clone());
    let delta = rep.delta_g(&model.subgroup);
    let phi = CVector::from_vec(grid_gaussian(&model.grid)?);
    let canon = GridAction::canonical(&model.grid);
    let finite: Vec<CVector> = e
        .elements()
        .flat_map(|x| {
            let t = rep.translation_matrix(&x);
            e.characters()
                .map(|chi| &t * rep.modulation_matrix(&chi) * &delta)
                .collect::<Vec<_>>()
        })
        .collect();
    let grid_vecs: Vec<CVector> = (0..model.grid.phase_len())
        .map(|p| canon.weyl(&PhasePoint::from_index(&model.grid, p)) * &phi)
        .collect();
    let g_len = model.grid.spatial_len();
    let mut orbit = CMatrix::zeros(model.dim(), finite.len() * grid_vecs.len());
    let mut col = 0;
    for f in &finite {
        for g in &grid_vecs {
            let mut c = orbit.column_mut(col);
            for (i, fi) in f.iter().enumerate() {
                c.rows_mut(i * g_len, g_len).copy_from(&(g * *fi));
            }
            col += 1;
        }
    }
    let rank = numerical_rank(&(&orbit * orbit.adjoint()), ORBIT_RANK_CUTOFF);
    Ok(OrbitSpan {
        vectors: col,
        rank,
        expected: model.dim(),
        spans: rank == model.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{parse_subgroup, RationalPhase};
    use crate::intertwiner::commutant_dimension;
    use crate::numerics::haar_random_unitary;

    fn model(group: &str, sub: &str, n: usize, h: f64) -> ProductModel {
        let e = FiniteAbelianGroup::parse(group).unwrap();
        let g = parse_subgroup(&e, sub).unwrap();
        ProductModel::new(g, GridSpec::new(1, n, h).unwrap())
    }

    #[test]
    fn canonical_product_action_is_valid() {
        let m = model("Z2", "[1]", 8, 1.0);
        let rho = m.canonical_action();
        assert_eq!(rho.dim(), 16);
        rho.validate(1e-12).unwrap();
        assert_eq!(cross_commutation_defect(&m, &rho), 0.0);
    }

    #[test]
    fn tensor_action_basics() {
        let m = model("Z3", "[]", 8, 1.0);
        let id = HeisenbergElement {
            t: RationalPhase::zero(),
            x: m.finite_group().zero(),
            chi: m.finite_group().zero(),
        };
        let a = m.tensor_action(&id, &PhasePoint::zero(1)).unwrap();
        assert_eq!(identity_defect(&a), 0.0);
        let x = HeisenbergElement {
            t: RationalPhase::new(1, 3),
            x: m.finite_group().unit(0),
            chi: m.finite_group().zero(),
        };
        let k = PhasePoint::new(vec![2], vec![-1]);
        let tx = m.tensor_action(&x, &PhasePoint::zero(1)).unwrap();
        let wk = m.tensor_action(&id, &k).unwrap();
        assert!(diff_max(&(&tx * &wk), &(&wk * &tx)) < 1e-15);
        let both = m.tensor_action(&x, &k).unwrap();
        assert!(diff_max(&both, &(&tx * &wk)) < 1e-14);
    }

    #[test]
    fn blocks_of_the_canonical_product() {
        let m = model("Z2", "[1]", 8, 1.0);
        let blocks = block_decompose(&m, &m.canonical_action()).unwrap();
        assert_eq!(blocks.blocks.len(), 2);
        assert!(blocks
            .blocks
            .iter()
            .all(|b| b.dim == 8 && b.multiplicity == 1));
        assert!(blocks.passed(), "{:?}", blocks.blocks);
    }

    #[test]
    fn trivial_finite_factor_is_the_grid_model() {
        let e = FiniteAbelianGroup::trivial();
        let m = ProductModel::new(
            ElementSubgroup::trivial(&e),
            GridSpec::new(1, 8, 1.0).unwrap(),
        );
        let blocks = block_decompose(&m, &m.canonical_action()).unwrap();
        assert_eq!(blocks.blocks.len(), 1);
        assert_eq!(blocks.blocks[0].dim, 8);
        let c = combined_intertwiner(&m, &m.canonical_action()).unwrap();
        assert!(c.passed());
    }

    #[test]
    fn combined_intertwiner_on_canonical_and_double_copy() {
        let m = model("Z2", "[]", 8, 1.0);
        let rho = m.canonical_action();
        let c = combined_intertwiner(&m, &rho).unwrap();
        assert_eq!(c.multiplicity, 1);
        assert!(c.passed(), "{}", c.max_defect());
        let x = haar_random_unitary(32, 3);
        let doubled = rho.copies(2).conjugate(&x);
        let c2 = combined_intertwiner(&m, &doubled).unwrap();
        assert_eq!(c2.multiplicity, 2);
        assert!(c2.passed(), "{}", c2.max_defect());
        let b2 = block_decompose(&m, &doubled).unwrap();
        assert!(b2.blocks.iter().all(|b| b.dim == 16 && b.multiplicity == 2));
    }

    #[test]
    fn orbit_of_the_base_vector_spans() {
        let m = model("Z2", "[1]", 8, 1.0);
        let o = orbit_span(&m).unwrap();
        assert_eq!(o.rank, 16);
        assert!(o.spans);
    }

    #[test]
    fn canonical_product_is_irreducible() {
        let m = model("Z2", "[]", 8, 1.0);
        assert_eq!(
            commutant_dimension(&m.canonical_action())
                .unwrap()
                .dimension,
            1
        );
    }

    #[test]
    fn rejects_a_broken_cross_relation() {
        let m = model("Z2", "[]", 8, 1.0);
        let rho = m.canonical_action();
        let mut t = rho.translation_generators().to_vec();
        // finite translation that no longer commutes with the grid leg
        t[0] = kron(
            &HeisenbergAction::canonical(m.finite_group()).translation_generators()[0],
            &GridAction::canonical(m.grid())
                .action()
                .modulation_generators()[0],
        );
        let bad = HeisenbergAction::new_unchecked(
            m.product_group(),
            t,
            rho.modulation_generators().to_vec(),
        )
        .unwrap();
        assert!(cross_commutation_defect(&m, &bad) > 0.1);
        assert!(matches!(
            block_decompose(&m, &bad),
            Err(Error::Hypothesis(_))
        ));
    }
}
