//! Decomposition of a grid action through the Gaussian projector
//! `P = ρ(W_Φ)`, `Φ = conj V(φ, φ)`.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::{Character, GroupElement, Residues};
use crate::error::{Error, Result};
use crate::intertwiner::AlphaDefects;
use crate::numerics::{
    diff_max, identity_defect, norm_max, op_norm, range_basis, seeded_rng, CMatrix, CVector, C64,
};

use super::operators::{weyl_quantize, GridAction};
use super::transform::fourier_wigner;
use super::{grid_gaussian, GridSpec, PhasePoint, PhaseSpaceFunction};

/// Defect threshold for grid decompositions.
pub const REAL_TOL: f64 = 1e-5;
/// Relative singular-value cutoff for the range of `P`.
pub const RANGE_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RealIsotypicDecomposition {
    pub multiplicity: usize,
    /// Orthonormal basis `{v_α}` of the range of `P`, as columns.
    pub range: CMatrix,
    pub projector: CMatrix,
    /// `max(‖P² − P‖, ‖P* − P‖)`.
    pub projector_defect: f64,
    /// `W_α`, each `dim × Nⁿ`.
    pub intertwiners: Vec<CMatrix>,
    pub per_alpha: Vec<AlphaDefects>,
    pub orthogonality_defect: f64,
    pub completeness_defect: f64,
    /// Relative residual of the least-squares fit of the defining relation.
    pub fit_residual: f64,
    pub tolerance: f64,
}

impl RealIsotypicDecomposition {
    pub fn max_defect(&self) -> f64 {
        self.per_alpha
            .iter()
            .flat_map(|a| [a.isometry_defect, a.equivariance_defect])
            .chain([
                self.orthogonality_defect,
                self.completeness_defect,
                self.projector_defect,
            ])
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
            "projector_defect": self.projector_defect,
            "fit_residual": self.fit_residual,
        })
    }
}

/// `Φ = conj V(φ, φ)` for the grid-normalized Gaussian `φ`.
pub fn gaussian_projector_symbol(grid: &GridSpec) -> Result<(Vec<C64>, PhaseSpaceFunction)> {
    let phi = grid_gaussian(grid)?;
    let v = fourier_wigner(grid, &phi, &phi)?;
    Ok((phi, v.conj()))
}

/// Columns `ρ(W_k)v` for every window point, one matrix per input vector:
/// `V^m v` once per `m`, then one product with `U^s` per `s`.
fn orbit_columns(rho: &GridAction, vectors: &[&CVector]) -> Vec<CMatrix> {
    let grid = rho.grid();
    let len = grid.spatial_len();
    let d = rho.dim();
    let c = vectors.len();
    let residues =
        |idx: usize| -> Vec<u64> { grid.unravel(idx).into_iter().map(|r| r as u64).collect() };
    let mut modulated = CMatrix::zeros(d, len * c);
    for mr in 0..len {
        let vm = rho
            .action()
            .modulation(&Character::from_residues(residues(mr)));
        for (i, v) in vectors.iter().enumerate() {
            modulated.set_column(mr * c + i, &(&vm * *v));
        }
    }
    let mut outs = vec![CMatrix::zeros(d, grid.phase_len()); c];
    for sr in 0..len {
        let s: Vec<i64> = grid
            .unravel(sr)
            .into_iter()
            .map(|r| grid.centered(r))
            .collect();
        let u = rho
            .action()
            .translation(&GroupElement::from_residues(residues(sr)));
        let block = &u * &modulated;
        for mr in 0..len {
            let sm: i64 = grid
                .unravel(mr)
                .into_iter()
                .zip(&s)
                .map(|(r, si)| grid.centered(r) * si)
                .sum();
            let phase = grid.half_phase(sm);
            for (i, out) in outs.iter_mut().enumerate() {
                out.set_column(sr * len + mr, &(block.column(mr * c + i) * phase));
            }
        }
    }
    outs
}

/// `W_α(W_k φ) = ρ(W_k) v_α`, fitted in the least-squares sense over every
/// window point `k`: `W = B A*(A A*)⁻¹` with `A = [W_k φ]`, `B = [ρ(W_k) v_α]`.
pub fn real_intertwiner_synth(rho: &GridAction) -> Result<RealIsotypicDecomposition> {
    let grid = *rho.grid();
    let d = rho.dim();
    let (phi, symbol) = gaussian_projector_symbol(&grid)?;
    let projector = weyl_quantize(&symbol, rho)?;
    let projector_defect = diff_max(&(&projector * &projector), &projector)
        .max(diff_max(&projector.adjoint(), &projector));
    let range = range_basis(&projector, RANGE_CUTOFF, 1.0);
    let m = range.ncols();
    if m == 0 && d > 0 {
        return Err(Error::Hypothesis(
            "ρ(W_Φ) vanishes: the action does not have the central character of the canonical one"
                .into(),
        ));
    }
    let canon = GridAction::canonical(&grid);
    // unit in the plain inner product of the sampled space
    let phi_vec = CVector::from_vec(phi) * C64::new(grid.spatial_weight().sqrt(), 0.0);
    let a = orbit_columns(&canon, &[&phi_vec]).remove(0);
    let gram = &a * a.adjoint();
    let lu = gram.clone().lu();
    let mut intertwiners = Vec::with_capacity(m);
    let mut per_alpha = Vec::with_capacity(m);
    let mut fit_residual: f64 = 0.0;
    let columns: Vec<CVector> = range.column_iter().map(|c| c.into_owned()).collect();
    let refs: Vec<&CVector> = columns.iter().collect();
    let bs = orbit_columns(rho, &refs);
    for b in bs {
        // W = B A* G⁻¹  ⇔  G W* = A B*
        let rhs = &a * b.adjoint();
        let w_adj = lu.solve(&rhs).ok_or_else(|| {
            Error::Numerical("orbit Gram matrix of the Gaussian is singular".into())
        })?;
        let w = w_adj.adjoint();
        let fit = &w * &a - &b;
        fit_residual = fit_residual.max(norm_max(&fit) / norm_max(&b).max(f64::MIN_POSITIVE));
        let isometry_defect = identity_defect(&(w.adjoint() * &w));
        let equivariance_defect = rho
            .action()
            .generators()
            .iter()
            .zip(canon.action().generators())
            .map(|((_, g), (_, c))| diff_max(&(*g * &w), &(&w * c)))
            .fold(0.0, f64::max);
        intertwiners.push(w);
        per_alpha.push(AlphaDefects {
            isometry_defect,
            equivariance_defect,
        });
    }
    let mut orthogonality_defect: f64 = 0.0;
    let mut sum = CMatrix::zeros(d, d);
    for (i, wa) in intertwiners.iter().enumerate() {
        sum += wa * wa.adjoint();
        for wb in &intertwiners[i + 1..] {
            orthogonality_defect = orthogonality_defect.max(norm_max(&(wa.adjoint() * wb)));
        }
    }
    Ok(RealIsotypicDecomposition {
        multiplicity: m,
        range,
        projector,
        projector_defect,
        intertwiners,
        per_alpha,
        orthogonality_defect,
        completeness_defect: identity_defect(&sum),
        fit_residual,
        tolerance: REAL_TOL,
    })
}

/// `‖ρ(W_Φ)ρ(W_k)ρ(W_Φ) − ⟨W_kφ,φ⟩ρ(W_Φ)‖_op` for one `k`.
pub fn projector_transport_defect(
    rho: &GridAction,
    projector: &CMatrix,
    gaussian_fw: &PhaseSpaceFunction,
    k: &PhasePoint,
) -> f64 {
    let lhs = projector * rho.weyl(k) * projector;
    op_norm(&(lhs - projector * gaussian_fw.get(k)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Eq2Report {
    pub samples: usize,
    /// Max `|⟨ρ(W_k)u, ρ(W_l)v⟩ − e^{πiω(k,l)}⟨W_{k−l}φ,φ⟩⟨u,v⟩|` for unit `u, v`.
    pub max_defect: f64,
    /// Max `|⟨ρ(W_k)u, ρ(W_l)v⟩|` over orthonormal pairs `u ⊥ v`.
    pub orthogonal_max: f64,
    /// Max defect of the identity as printed, `⟨W_kφ,φ⟩` in place of
    /// `⟨W_{k−l}φ,φ⟩`, restricted to `l = 0` where both agree.
    pub literal_l0_defect: f64,
    /// Max defect of the printed form at `k = l ≠ 0`, for the record.
    pub literal_diagonal_defect: f64,
}

/// Samples the inner-product identity on the range of `ρ(W_Φ)`.
pub fn eq2_check(
    rho: &GridAction,
    range: &CMatrix,
    samples: usize,
    seed: u64,
) -> Result<Eq2Report> {
    let grid = *rho.grid();
    let phi = grid_gaussian(&grid)?;
    let fw = fourier_wigner(&grid, &phi, &phi)?;
    let m = range.ncols();
    if m == 0 {
        return Err(Error::Hypothesis("empty range: nothing to sample".into()));
    }
    let mut rng = seeded_rng(seed);
    let half = grid.points as i64 / 2;
    let point = |rng: &mut rand_chacha::ChaCha8Rng| {
        // stay near the origin where ⟨W_kφ,φ⟩ is not negligible
        let r = (half / 4).max(1);
        PhasePoint::new(
            (0..grid.n).map(|_| rng.random_range(-r..=r)).collect(),
            (0..grid.n).map(|_| rng.random_range(-r..=r)).collect(),
        )
    };
    let unit = |rng: &mut rand_chacha::ChaCha8Rng| -> CVector {
        let c = crate::numerics::random_vector(m, rng);
        let v = range * c;
        let n = v.norm();
        v / C64::new(n, 0.0)
    };
    let mut report = Eq2Report {
        samples,
        max_defect: 0.0,
        orthogonal_max: 0.0,
        literal_l0_defect: 0.0,
        literal_diagonal_defect: 0.0,
    };
    for _ in 0..samples {
        let k = point(&mut rng);
        let l = point(&mut rng);
        let u = unit(&mut rng);
        let v = unit(&mut rng);
        let wk = rho.weyl(&k);
        let wl = rho.weyl(&l);
        let (wku, wlv) = (&wk * &u, &wl * &v);
        let lhs = wlv.dotc(&wku);
        let phase = grid.half_phase(k.omega_numerator(&l));
        let expect = phase * fw.get(&k.sub(&l)) * v.dotc(&u);
        report.max_defect = report.max_defect.max((lhs - expect).norm());

        // u ⊥ v inside the range
        if m >= 2 {
            let mut w = unit(&mut rng);
            w -= &u * u.dotc(&w);
            let w = &w / C64::new(w.norm(), 0.0);
            let val = (&wl * &w).dotc(&wku);
            report.orthogonal_max = report.orthogonal_max.max(val.norm());
        }

        let lhs0 = v.dotc(&wku);
        let literal0 = fw.get(&k) * v.dotc(&u);
        report.literal_l0_defect = report.literal_l0_defect.max((lhs0 - literal0).norm());
        if k != PhasePoint::zero(grid.n) {
            let diag = wku.dotc(&wku);
            let literal = fw.get(&k) * u.dotc(&u);
            report.literal_diagonal_defect =
                report.literal_diagonal_defect.max((diag - literal).norm());
        }
    }
    Ok(report)
}
