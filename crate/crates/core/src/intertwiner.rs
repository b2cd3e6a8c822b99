//! Irreducibility through the commutant, and explicit intertwiners
//! `W_α: L²(E) → H^α` for an arbitrary action with the right central
//! character.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::{coset_representatives, Character, ElementSubgroup, GroupElement, Subgroup};
use crate::action::{HeisenbergAction, RELATION_TOL};
use crate::error::{Error, Result};
use crate::heisenberg::CanonicalRep;
use crate::numerics::{diff_max, identity_defect, kron, norm_max, nullspace, CMatrix, C64, ONE};
use crate::peter_weyl::{decompose, SubgroupDuality};

pub const COMMUTANT_CUTOFF: f64 = 1e-8;
pub const UNIQUENESS_TOL: f64 = 1e-7;

/// Blocks below this size are treated as structurally zero.
const BLOCK_ZERO: f64 = 1e-12;

/// `1e−8` up to dimension 128, `√dim·1e−9` above.
pub fn defect_tolerance(dim: usize) -> f64 {
    if dim <= 128 {
        1e-8
    } else {
        (dim as f64).sqrt() * 1e-9
    }
}

#[derive(Debug, Clone)]
pub struct CommutantReport {
    pub dimension: usize,
    pub basis: Vec<CMatrix>,
    /// Max commutation defect of the basis against every generator.
    pub residual: f64,
    /// Smallest singular value kept out of the null space, relative to the
    /// largest; a clear gap above the cutoff makes the count trustworthy.
    pub gap: f64,
}

fn max_commutation_defect(rho: &HeisenbergAction, basis: &[CMatrix]) -> f64 {
    basis
        .iter()
        .flat_map(|x| {
            rho.generators()
                .into_iter()
                .map(move |(_, g)| diff_max(&(g * x), &(x * g)))
        })
        .fold(0.0, f64::max)
}

fn relative_gap(sv: &[f64], cutoff: f64) -> f64 {
    let smax = sv.first().cloned().unwrap_or(0.0);
    if smax == 0.0 {
        return 0.0;
    }
    sv.iter()
        .rfind(|&&s| s > cutoff * smax)
        .map(|s| s / smax)
        .unwrap_or(1.0)
}

/// Dimension of `{X : ρ(g)X = Xρ(g) for all generators g}`.
///
/// Any such `X` preserves the joint eigenspaces of the modulations, so it is
/// `Σ_a Q_a Y_a Q_a*` over those eigenspaces; only the translation
/// constraints between blocks remain to be solved.
pub fn commutant_dimension(rho: &HeisenbergAction) -> Result<CommutantReport> {
    rho.validate(RELATION_TOL)?;
    let d = rho.dim();
    if rho.group().rank() == 0 {
        return commutant_dimension_dense(rho);
    }
    let dec = decompose(rho, &Subgroup::trivial(rho.group()))?;
    if dec.total_rank() != d {
        return Err(Error::Numerical(format!(
            "modulation eigenspaces have total rank {} in dimension {d}",
            dec.total_rank()
        )));
    }
    let qs: Vec<&CMatrix> = dec.spaces().iter().map(|s| &s.basis).collect();
    let mut offsets = Vec::with_capacity(qs.len());
    let mut unknowns = 0;
    for q in &qs {
        offsets.push(unknowns);
        unknowns += q.ncols() * q.ncols();
    }
    // column-major vec: vec(BY) = (I⊗B)vec Y, vec(YB) = (Bᵀ⊗I)vec Y
    let mut rows: Vec<CMatrix> = Vec::new();
    for u in rho.translation_generators() {
        let uq: Vec<CMatrix> = qs.iter().map(|q| u * *q).collect();
        for (a, qa) in qs.iter().enumerate() {
            let qa_adj = qa.adjoint();
            for (b, uqb) in uq.iter().enumerate() {
                let blk = &qa_adj * uqb;
                if norm_max(&blk) <= BLOCK_ZERO {
                    continue;
                }
                let (ra, rb) = (qa.ncols(), qs[b].ncols());
                let mut row = CMatrix::zeros(ra * rb, unknowns);
                let left = kron(&CMatrix::identity(rb, rb), &blk);
                let right = kron(&blk.transpose(), &CMatrix::identity(ra, ra));
                let mut view = row.view_mut((0, offsets[b]), (ra * rb, rb * rb));
                view += &left;
                let mut view = row.view_mut((0, offsets[a]), (ra * rb, ra * ra));
                view -= &right;
                rows.push(row);
            }
        }
    }
    let n_rows: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut system = CMatrix::zeros(n_rows.max(1), unknowns);
    let mut at = 0;
    for r in rows {
        system
            .view_mut((at, 0), (r.nrows(), unknowns))
            .copy_from(&r);
        at += r.nrows();
    }
    let ns = if norm_max(&system) == 0.0 {
        // no translations link the blocks: every block is free
        crate::numerics::NullSpace {
            dim: unknowns,
            basis: CMatrix::identity(unknowns, unknowns),
            singular_values: vec![0.0; unknowns],
        }
    } else {
        nullspace(&system, COMMUTANT_CUTOFF)?
    };
    let basis: Vec<CMatrix> = ns
        .basis
        .column_iter()
        .map(|y| {
            let mut x = CMatrix::zeros(d, d);
            for (a, q) in qs.iter().enumerate() {
                let r = q.ncols();
                let ya = CMatrix::from_fn(r, r, |i, j| y[offsets[a] + i + j * r]);
                x += *q * ya * q.adjoint();
            }
            x
        })
        .collect();
    Ok(CommutantReport {
        dimension: ns.dim,
        residual: max_commutation_defect(rho, &basis),
        gap: relative_gap(&ns.singular_values, COMMUTANT_CUTOFF),
        basis,
    })
}

/// The same count from the full `D²`-variable system
/// `(I⊗A − Aᵀ⊗I) vec X = 0` over all generators.
pub fn commutant_dimension_dense(rho: &HeisenbergAction) -> Result<CommutantReport> {
    let d = rho.dim();
    let gens = rho.generators();
    if gens.is_empty() {
        return Ok(CommutantReport {
            dimension: d * d,
            basis: (0..d * d)
                .map(|k| {
                    CMatrix::from_fn(d, d, |i, j| {
                        if i + j * d == k {
                            ONE
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    })
                })
                .collect(),
            residual: 0.0,
            gap: 1.0,
        });
    }
    let eye = CMatrix::identity(d, d);
    let mut system = CMatrix::zeros(gens.len() * d * d, d * d);
    for (k, (_, a)) in gens.iter().enumerate() {
        let block = kron(&eye, a) - kron(&a.transpose(), &eye);
        system
            .view_mut((k * d * d, 0), (d * d, d * d))
            .copy_from(&block);
    }
    let ns = nullspace(&system, COMMUTANT_CUTOFF)?;
    let basis: Vec<CMatrix> = ns
        .basis
        .column_iter()
        .map(|v| CMatrix::from_fn(d, d, |i, j| v[i + j * d]))
        .collect();
    Ok(CommutantReport {
        dimension: ns.dim,
        residual: max_commutation_defect(rho, &basis),
        gap: relative_gap(&ns.singular_values, COMMUTANT_CUTOFF),
        basis,
    })
}

/// The orthonormal basis `{T_xM_χ δ_G}` of `L²(E)` over coset
/// representatives of `G × G^⊥`, with its labels. Columns of the matrix.
pub fn canonical_coset_basis(
    duality: &SubgroupDuality,
) -> (Vec<(GroupElement, Character)>, CMatrix) {
    let e = duality.group();
    let rep = CanonicalRep::new(e.clone());
    let delta = rep.delta_g(duality.subgroup());
    let xs = coset_representatives(duality.subgroup());
    let chis = coset_representatives(duality.annihilator());
    let mut labels = Vec::with_capacity(e.size());
    let mut basis = CMatrix::zeros(e.size(), e.size());
    let mut col = 0;
    for x in &xs {
        let t = rep.translation_matrix(x);
        for chi in &chis {
            let v = &t * rep.modulation_matrix(chi) * &delta;
            basis.set_column(col, &v);
            labels.push((x.clone(), chi.clone()));
            col += 1;
        }
    }
    (labels, basis)
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaDefects {
    pub isometry_defect: f64,
    pub equivariance_defect: f64,
}

#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    pub multiplicity: usize,
    /// `W_α`, each `dim × |E|`.
    pub intertwiners: Vec<CMatrix>,
    pub per_alpha: Vec<AlphaDefects>,
    /// `max_{α≠β} ‖W_α* W_β‖`.
    pub orthogonality_defect: f64,
    /// `‖Σ W_α W_α* − I‖`.
    pub completeness_defect: f64,
    /// Gram defect of the coset basis `{T_xM_χ δ_G}`.
    pub coset_basis_defect: f64,
    pub tolerance: f64,
}

impl IsotypicDecomposition {
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

    /// The unimodular `c` with `‖W − c·W_α‖_max ≤ 1e−7`, if it exists.
    pub fn uniqueness_scalar(&self, alpha: usize, w: &CMatrix) -> Result<C64> {
        let wa = self
            .intertwiners
            .get(alpha)
            .ok_or_else(|| Error::Uniqueness(format!("no component α={alpha}")))?;
        if w.shape() != wa.shape() {
            return Err(Error::Shape(format!(
                "candidate {:?} vs intertwiner {:?}",
                w.shape(),
                wa.shape()
            )));
        }
        let c = (wa.adjoint() * w).trace() / C64::new(wa.ncols() as f64, 0.0);
        let residual = diff_max(w, &(wa * c));
        if residual > UNIQUENESS_TOL || (c.norm() - 1.0).abs() > UNIQUENESS_TOL {
            return Err(Error::Uniqueness(format!(
                "candidate is not a unimodular multiple of W_{alpha}: best scalar {c:.6} leaves residual {residual:.3e}"
            )));
        }
        Ok(c)
    }

    pub fn to_json(&self, commutant_dim: Option<usize>) -> Value {
        json!({
            "multiplicity": self.multiplicity,
            "per_alpha": self.per_alpha,
            "orthogonality_defect": self.orthogonality_defect,
            "completeness_defect": self.completeness_defect,
            "commutant_dim": commutant_dim,
        })
    }
}

/// `W_α(T_xM_χ δ_G) = ρ(T_x)ρ(M_χ)v_α` for an orthonormal basis `{v_α}` of
/// `H_{0,0}`, assembled on the coset basis.
pub fn synthesize_intertwiners(
    rho: &HeisenbergAction,
    subgroup: &ElementSubgroup,
) -> Result<IsotypicDecomposition> {
    rho.validate(RELATION_TOL)?;
    let e = rho.group();
    let (d, n) = (rho.dim(), e.size());
    if d % n != 0 {
        return Err(Error::Hypothesis(format!(
            "dimension {d} is not a multiple of |E| = {n}; no decomposition into canonical copies exists"
        )));
    }
    let dec = decompose(rho, subgroup)?;
    let m = dec.base_space().rank();
    if m == 0 && d > 0 {
        return Err(Error::Hypothesis(
            "H_{0,0} is zero in a nonzero space".into(),
        ));
    }
    if !dec.equal_ranks() || m * n != d {
        return Err(Error::Hypothesis(format!(
            "eigenspace ranks {:?} are not all equal to dim/|E|",
            dec.ranks()
        )));
    }
    let (labels, coset) = canonical_coset_basis(dec.duality());
    let coset_basis_defect = identity_defect(&(coset.adjoint() * &coset));
    let coset_adj = coset.adjoint();
    let ops: Vec<CMatrix> = labels
        .iter()
        .map(|(x, chi)| rho.translation(x) * rho.modulation(chi))
        .collect();
    let v = &dec.base_space().basis;
    let canon = HeisenbergAction::canonical(e);
    let pairs: Vec<(CMatrix, AlphaDefects)> = (0..m)
        .into_par_iter()
        .map(|alpha| {
            let va = v.column(alpha);
            let mut images = CMatrix::zeros(d, n);
            for (k, op) in ops.iter().enumerate() {
                images.set_column(k, &(op * va));
            }
            let w = images * &coset_adj;
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
    for (a, wa) in intertwiners.iter().enumerate() {
        sum += wa * wa.adjoint();
        for wb in &intertwiners[a + 1..] {
            orthogonality_defect = orthogonality_defect.max(norm_max(&(wa.adjoint() * wb)));
        }
    }
    Ok(IsotypicDecomposition {
        multiplicity: m,
        intertwiners,
        per_alpha,
        orthogonality_defect,
        completeness_defect: identity_defect(&sum),
        coset_basis_defect,
        tolerance: defect_tolerance(d),
    })
}

/// Synthesizes the decomposition of `ρ` and recovers the scalar relating `w`
/// to `W_α`.
pub fn uniqueness_check(
    rho: &HeisenbergAction,
    subgroup: &ElementSubgroup,
    alpha: usize,
    w: &CMatrix,
) -> Result<C64> {
    synthesize_intertwiners(rho, subgroup)?.uniqueness_scalar(alpha, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{parse_subgroup, FiniteAbelianGroup};
    use crate::numerics::{cis_turns, haar_random_unitary};

    fn group(s: &str) -> FiniteAbelianGroup {
        FiniteAbelianGroup::parse(s).unwrap()
    }

    #[test]
    fn canonical_cyclic_groups_are_irreducible() {
        for n in 2..=8u64 {
            let g = FiniteAbelianGroup::cyclic(n).unwrap();
            let rho = HeisenbergAction::canonical(&g);
            let fast = commutant_dimension(&rho).unwrap();
            let dense = commutant_dimension_dense(&rho).unwrap();
            assert_eq!(fast.dimension, 1, "Z{n}");
            assert_eq!(dense.dimension, 1, "Z{n}");
            assert!(fast.residual < 1e-12);
        }
    }

    #[test]
    fn doubled_canonical_commutant_is_four() {
        let rho = HeisenbergAction::canonical(&group("Z2xZ2")).copies(2);
        assert_eq!(commutant_dimension(&rho).unwrap().dimension, 4);
        assert_eq!(commutant_dimension_dense(&rho).unwrap().dimension, 4);
    }

    #[test]
    fn trivial_group_commutant() {
        let rho = HeisenbergAction::trivial(1);
        assert_eq!(commutant_dimension(&rho).unwrap().dimension, 1);
    }

    #[test]
    fn commutant_counts_agree_on_conjugated_copies() {
        let g = group("Z3");
        let x = haar_random_unitary(9, 2);
        let rho = HeisenbergAction::canonical(&g).copies(3).conjugate(&x);
        let fast = commutant_dimension(&rho).unwrap();
        assert_eq!(fast.dimension, 9);
        assert_eq!(commutant_dimension_dense(&rho).unwrap().dimension, 9);
        assert!(fast.residual < 1e-10);
    }

    #[test]
    fn canonical_self_decomposition() {
        let g = group("Z4");
        let s = parse_subgroup(&g, "[2]").unwrap();
        let rho = HeisenbergAction::canonical(&g);
        let iso = synthesize_intertwiners(&rho, &s).unwrap();
        assert_eq!(iso.multiplicity, 1);
        assert!(iso.passed());
        assert!(iso.coset_basis_defect < 1e-12);
        // v_1 is δ_G up to phase, so W_1 is a scalar multiple of I
        let w = &iso.intertwiners[0];
        let c = w[(0, 0)];
        assert!((c.norm() - 1.0).abs() < 1e-12);
        assert!(diff_max(w, &(CMatrix::identity(4, 4) * c)) < 1e-12);
    }

    #[test]
    fn conjugated_double_copy() {
        let g = group("Z2xZ2");
        let s = parse_subgroup(&g, "[(1,0)]").unwrap();
        let x = haar_random_unitary(8, 11);
        let rho = HeisenbergAction::canonical(&g).copies(2).conjugate(&x);
        let iso = synthesize_intertwiners(&rho, &s).unwrap();
        assert_eq!(iso.multiplicity, 2);
        assert!(iso.max_defect() <= 1e-8, "{}", iso.max_defect());
        // X*W_α must be c_α ⊗ I with orthonormal c_α ∈ C²
        let cs: Vec<[C64; 2]> = iso
            .intertwiners
            .iter()
            .map(|w| {
                let y = x.adjoint() * w;
                let c = [y[(0, 0)], y[(4, 0)]];
                let mut expect = CMatrix::zeros(8, 4);
                for i in 0..4 {
                    expect[(i, i)] = c[0];
                    expect[(i + 4, i)] = c[1];
                }
                assert!(diff_max(&y, &expect) < 1e-10);
                c
            })
            .collect();
        let overlap = cs[0][0].conj() * cs[1][0] + cs[0][1].conj() * cs[1][1];
        assert!(overlap.norm() < 1e-10);
    }

    #[test]
    fn indivisible_dimension_is_rejected() {
        let g = group("Z2");
        let rho = HeisenbergAction::trivial(3);
        assert!(synthesize_intertwiners(&rho, &Subgroup::trivial(rho.group())).is_ok());
        let c = HeisenbergAction::canonical(&g);
        let padded = HeisenbergAction::new_unchecked(
            g.clone(),
            c.translation_generators().iter().map(pad).collect(),
            c.modulation_generators().iter().map(pad).collect(),
        )
        .unwrap();
        // the padded action has an extra fixed vector, which breaks the relation
        let err = synthesize_intertwiners(&padded, &Subgroup::trivial(&g)).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }

    fn pad(m: &CMatrix) -> CMatrix {
        let d = m.nrows();
        let mut out = CMatrix::identity(d + 1, d + 1);
        out.view_mut((0, 0), (d, d)).copy_from(m);
        out
    }

    #[test]
    fn uniqueness_examples() {
        let g = group("Z4");
        let s = parse_subgroup(&g, "[2]").unwrap();
        let x = haar_random_unitary(8, 3);
        let rho = HeisenbergAction::canonical(&g).copies(2).conjugate(&x);
        let iso = synthesize_intertwiners(&rho, &s).unwrap();
        let w = iso.intertwiners[0].clone();
        let c = iso.uniqueness_scalar(0, &w).unwrap();
        assert!((c - ONE).norm() < 1e-12);
        let theta = cis_turns(0.3);
        let c = iso.uniqueness_scalar(0, &(&w * theta)).unwrap();
        assert!((c - theta).norm() < 1e-12);
        let wrong = iso.intertwiners[1].clone();
        assert!(matches!(
            iso.uniqueness_scalar(0, &wrong),
            Err(Error::Uniqueness(_))
        ));
        assert!(uniqueness_check(&rho, &s, 1, &wrong).is_ok());
    }
}
