use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::abelian::{GroupElement, Residues};
use crate::action::HeisenbergAction;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigen, op_norm, unitarity_defect, CMatrix, FftPlan, C64, ZERO};

use super::{GridSpec, PhasePoint, PhaseSpaceFunction};

/// Relation tolerance for grid actions.
pub const GRID_RELATION_TOL: f64 = 1e-9;

/// `(W_k f)[j] = e^{πi m·(2j − N − s)/N} f[j − s]`, the sampled form of
/// `e^{πixy}T_xM_y`. Any lattice point is accepted; indices wrap.
pub fn weyl_operator(grid: &GridSpec, k: &PhasePoint) -> Result<CMatrix> {
    if k.n() != grid.n {
        return Err(Error::Shape(format!(
            "phase point of dimension {} on a grid with n = {}",
            k.n(),
            grid.n
        )));
    }
    let d = grid.spatial_len();
    let big_n = grid.points as i64;
    let mut w = CMatrix::zeros(d, d);
    for j in 0..d {
        let jv = grid.unravel(j);
        let mut src = Vec::with_capacity(grid.n);
        let mut num = 0i64;
        for (i, &ji) in jv.iter().enumerate() {
            let ji = ji as i64;
            src.push(ji - k.s[i]);
            num += k.m[i] * (2 * ji - big_n - k.s[i]);
        }
        w[(j, grid.ravel_residues(&src))] = grid.half_phase(num);
    }
    Ok(w)
}

/// A representation of the grid Heisenberg group, given by the images of
/// the unit shifts `U_i` and unit modulations `V_i` over `(Z/N)ⁿ`.
#[derive(Debug, Clone)]
pub struct GridAction {
    grid: GridSpec,
    action: HeisenbergAction,
    canonical: bool,
    frame: OnceLock<std::result::Result<ModulationFrame, String>>,
}

/// Joint eigenbasis of the modulations. Columns `rμ..(r+1)μ` of `q` span
/// the space where `ρ(V_i) = e^{2πi r_i/N}`, and `ρ(U_i)` carries block `r`
/// onto block `r + e_i` through the `μ×μ` unitary `steps[i][r]`.
#[derive(Debug, Clone)]
struct ModulationFrame {
    q: CMatrix,
    mu: usize,
    steps: Vec<Vec<CMatrix>>,
}

/// Step defect above which the relations are taken to have failed.
const FRAME_TOL: f64 = 1e-6;

fn modulation_frame(rho: &GridAction) -> std::result::Result<ModulationFrame, String> {
    let grid = rho.grid;
    let big_n = grid.points;
    let len = grid.spatial_len();
    let d = rho.dim();
    if !d.is_multiple_of(len) {
        return Err(format!("dimension {d} is not a multiple of N^n = {len}"));
    }
    let mu = d / len;
    // cos(θ − α) separates all N-th roots θ when α = π/(2N)
    let c = crate::numerics::cis_turns(-1.0 / (4.0 * big_n as f64));
    let mut blocks: Vec<(Vec<i64>, CMatrix)> = vec![(Vec::new(), CMatrix::identity(d, d))];
    for v in rho.action.modulation_generators() {
        let mut next = Vec::new();
        for (label, basis) in blocks {
            let vr = basis.adjoint() * v * &basis;
            let h = (&vr * c + vr.adjoint() * c.conj()) * C64::new(0.5, 0.0);
            let (_, u) = hermitian_eigen(&h);
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); big_n];
            for j in 0..u.ncols() {
                let col = u.column(j);
                let lambda = col.dotc(&(&vr * col));
                let r = (lambda.arg() * big_n as f64 / (2.0 * PI)).round() as i64;
                groups[r.rem_euclid(big_n as i64) as usize].push(j);
            }
            for (r, cols) in groups.into_iter().enumerate() {
                let sub = CMatrix::from_fn(u.nrows(), cols.len(), |a, b| u[(a, cols[b])]);
                let mut l = label.clone();
                l.push(r as i64);
                next.push((l, &basis * sub));
            }
        }
        blocks = next;
    }
    let mut q = CMatrix::zeros(d, d);
    for (label, b) in &blocks {
        if b.ncols() != mu {
            return Err(format!(
                "modulation eigenspace {label:?} has dimension {}, expected {mu}",
                b.ncols()
            ));
        }
        q.columns_mut(grid.ravel_residues(label) * mu, mu)
            .copy_from(b);
    }
    let block = |r: usize| q.columns(r * mu, mu);
    let mut steps = Vec::with_capacity(grid.n);
    for (i, u) in rho.action.translation_generators().iter().enumerate() {
        let mut per = Vec::with_capacity(len);
        for r in 0..len {
            let mut t: Vec<i64> = grid.unravel(r).into_iter().map(|v| v as i64).collect();
            t[i] += 1;
            let step = block(grid.ravel_residues(&t)).adjoint() * (u * block(r));
            if unitarity_defect(&step) > FRAME_TOL {
                return Err(format!(
                    "ρ(U_{i}) does not carry modulation eigenspace {r} to its successor"
                ));
            }
            per.push(step);
        }
        steps.push(per);
    }
    Ok(ModulationFrame { q, mu, steps })
}

impl GridAction {
    /// Checks the group shape and the relations at `1e−9`.
    pub fn new(grid: &GridSpec, action: HeisenbergAction) -> Result<Self> {
        let expect = vec![grid.points as u64; grid.n];
        if action.group().cyclic_orders() != expect.as_slice() {
            return Err(Error::Shape(format!(
                "action of {:?} is not over (Z/{})^{}",
                action.group().cyclic_orders(),
                grid.points,
                grid.n
            )));
        }
        action.validate(GRID_RELATION_TOL)?;
        Ok(GridAction {
            grid: *grid,
            action,
            canonical: false,
            frame: OnceLock::new(),
        })
    }

    /// Shifts and `V_i = diag(e^{2πi(j_i − N/2)/N})` on the sampled space.
    pub fn canonical(grid: &GridSpec) -> Self {
        let base = HeisenbergAction::canonical(&grid.group());
        let minus = C64::new(-1.0, 0.0);
        let modulations = base
            .modulation_generators()
            .iter()
            .map(|v| v * minus)
            .collect();
        let action = HeisenbergAction::new_unchecked(
            grid.group(),
            base.translation_generators().to_vec(),
            modulations,
        )
        .expect("canonical grid shapes");
        GridAction {
            grid: *grid,
            action,
            canonical: true,
            frame: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn action(&self) -> &HeisenbergAction {
        &self.action
    }

    pub fn dim(&self) -> usize {
        self.action.dim()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    fn frame(&self) -> Result<&ModulationFrame> {
        self.frame
            .get_or_init(|| modulation_frame(self))
            .as_ref()
            .map_err(|e| Error::Hypothesis(e.clone()))
    }

    fn residues(&self, v: &[i64]) -> GroupElement {
        let n = self.grid.points as i64;
        GroupElement::from_residues(v.iter().map(|x| x.rem_euclid(n) as u64).collect())
    }

    /// `ρ(W_k) = e^{πi s·m/N} ρ(U)^s ρ(V)^m`.
    pub fn weyl(&self, k: &PhasePoint) -> CMatrix {
        let sm: i64 = k.s.iter().zip(&k.m).map(|(a, b)| a * b).sum();
        let u = self.action.translation(&self.residues(&k.s));
        let v = self
            .action
            .modulation(&crate::abelian::Character::from_residues(
                self.residues(&k.m).residues().to_vec(),
            ));
        (u * v) * self.grid.half_phase(sm)
    }
}

/// `ρ(W_Φ) = N⁻ⁿ Σ_k Φ(k) ρ(W_k)` over the window.
pub fn weyl_quantize(phi: &PhaseSpaceFunction, rho: &GridAction) -> Result<CMatrix> {
    if phi.grid() != rho.grid() {
        return Err(Error::Shape(
            "phase-space function and action on different grids".into(),
        ));
    }
    if rho.is_canonical() {
        Ok(quantize_canonical(phi))
    } else {
        quantize_generic(phi, rho)
    }
}

/// Column by column: `W_Φ[j, j−s] = N⁻ⁿ Σ_m Φ(s,m) e^{πi m·(2j−N−s)/N}`,
/// one inverse FFT over `m` per shift `s`.
fn quantize_canonical(phi: &PhaseSpaceFunction) -> CMatrix {
    let grid = *phi.grid();
    let len = grid.spatial_len();
    let plan = FftPlan::new(grid.points);
    let w = grid.phase_weight();
    let mut out = CMatrix::zeros(len, len);
    let mut line = vec![ZERO; len];
    for sr in 0..len {
        let s: Vec<i64> = grid
            .unravel(sr)
            .into_iter()
            .map(|r| grid.centered(r))
            .collect();
        for (mr, z) in line.iter_mut().enumerate() {
            let m: Vec<i64> = grid
                .unravel(mr)
                .into_iter()
                .map(|r| grid.centered(r))
                .collect();
            // e^{πi m·(−N − s)/N}
            let num: i64 = m
                .iter()
                .zip(&s)
                .map(|(mi, si)| -mi * (grid.points as i64 + si))
                .sum();
            *z = phi.values()[sr * len + mr] * grid.half_phase(num) * w;
        }
        plan.raw_nd(&mut line, grid.n, true);
        for (j, z) in line.iter().enumerate() {
            let src: Vec<i64> = grid
                .unravel(j)
                .iter()
                .zip(&s)
                .map(|(&ji, si)| ji as i64 - si)
                .collect();
            out[(j, grid.ravel_residues(&src))] = *z;
        }
    }
    out
}

/// In the modulation frame `ρ(U)^s ρ(V)^m` sends block `r` to block `r + s`
/// with scalar `e^{2πi r·m/N}`, so the sum over `m` is one FFT per `s` and
/// `Q*ρ(W_Φ)Q` is block-sparse.
fn quantize_generic(phi: &PhaseSpaceFunction, rho: &GridAction) -> Result<CMatrix> {
    let frame = rho.frame()?;
    let grid = *phi.grid();
    let len = grid.spatial_len();
    let mu = frame.mu;
    let w = grid.phase_weight();
    let plan = FftPlan::new(grid.points);
    let add = |a: &[u64], b: &[u64]| -> usize {
        let v: Vec<i64> = a.iter().zip(b).map(|(x, y)| (x + y) as i64).collect();
        grid.ravel_residues(&v)
    };
    let residues: Vec<Vec<u64>> = (0..len)
        .map(|i| grid.unravel(i).into_iter().map(|v| v as u64).collect())
        .collect();
    let centered: Vec<Vec<i64>> = residues
        .iter()
        .map(|r| r.iter().map(|&v| grid.centered(v as usize)).collect())
        .collect();
    let mut x = CMatrix::zeros(rho.dim(), rho.dim());
    // shifts[s][r] = Q_{r+s}* ρ(U)^s Q_r
    let mut shifts: Vec<Vec<CMatrix>> = Vec::with_capacity(len);
    let mut line = vec![ZERO; len];
    for sr in 0..len {
        let s = &residues[sr];
        let ms: Vec<CMatrix> = match s.iter().position(|&v| v > 0) {
            None => vec![CMatrix::identity(mu, mu); len],
            Some(i) => {
                let mut prev = s.clone();
                prev[i] -= 1;
                let p = add(&prev, &vec![0; grid.n]);
                (0..len)
                    .map(|r| &frame.steps[i][add(&residues[r], &prev)] * &shifts[p][r])
                    .collect()
            }
        };
        for (mr, z) in line.iter_mut().enumerate() {
            let sm: i64 = centered[sr]
                .iter()
                .zip(&centered[mr])
                .map(|(a, b)| a * b)
                .sum();
            *z = phi.values()[sr * len + mr] * grid.half_phase(sm);
        }
        plan.raw_nd(&mut line, grid.n, true);
        for r in 0..len {
            let f = line[r] * w;
            if f != ZERO {
                let t = add(&residues[r], s);
                let mut view = x.view_mut((t * mu, r * mu), (mu, mu));
                view += &ms[r] * f;
            }
        }
        shifts.push(ms);
    }
    Ok(&frame.q * x * frame.q.adjoint())
}

/// `N⁻ⁿ Σ_k Φ(k)ρ(W_k)` term by term; reference for the frame path.
#[cfg(test)]
fn quantize_generic_direct(phi: &PhaseSpaceFunction, rho: &GridAction) -> CMatrix {
    let grid = *phi.grid();
    let mut out = CMatrix::zeros(rho.dim(), rho.dim());
    for (p, v) in phi.values().iter().enumerate() {
        out += rho.weyl(&PhasePoint::from_index(&grid, p)) * (v * grid.phase_weight());
    }
    out
}

/// The symbol of an operator on the sampled space, `Φ(k) = tr(W_k* A)`;
/// inverse to [`weyl_quantize`] for the canonical action.
pub fn weyl_symbol(grid: &GridSpec, a: &CMatrix) -> Result<PhaseSpaceFunction> {
    let len = grid.spatial_len();
    if a.shape() != (len, len) {
        return Err(Error::Shape(format!(
            "operator of shape {:?} on a grid of {len} points",
            a.shape()
        )));
    }
    let plan = FftPlan::new(grid.points);
    let mut values = vec![ZERO; grid.phase_len()];
    let mut line = vec![ZERO; len];
    for sr in 0..len {
        let s: Vec<i64> = grid
            .unravel(sr)
            .into_iter()
            .map(|r| grid.centered(r))
            .collect();
        for (i, z) in line.iter_mut().enumerate() {
            let src: Vec<i64> = grid
                .unravel(i)
                .iter()
                .zip(&s)
                .map(|(&ii, si)| ii as i64 - si)
                .collect();
            *z = a[(i, grid.ravel_residues(&src))];
        }
        plan.raw_nd(&mut line, grid.n, false);
        for (mr, z) in line.iter().enumerate() {
            let m: Vec<i64> = grid
                .unravel(mr)
                .into_iter()
                .map(|r| grid.centered(r))
                .collect();
            // e^{πi m·(N + s)/N}
            let num: i64 = m
                .iter()
                .zip(&s)
                .map(|(mi, si)| mi * (grid.points as i64 + si))
                .sum();
            values[sr * len + mr] = z * grid.half_phase(num);
        }
    }
    PhaseSpaceFunction::from_values(grid, values)
}

#[derive(Debug, Clone, Serialize)]
pub struct FaithfulnessReport {
    pub phi_sup: f64,
    pub operator_norm: f64,
    /// `Nⁿ`: on the grid `|Φ(k)| = |tr(W_k*ρ(W_Φ))|/m ≤ Nⁿ‖ρ(W_Φ)‖`.
    pub bound_constant: f64,
    /// `‖Φ‖_∞ / ‖ρ(W_Φ)‖`, zero when both vanish.
    pub empirical_constant: f64,
    pub consistent: bool,
}

/// Compares `‖Φ‖_∞` with `‖ρ(W_Φ)‖` and the grid bound between them.
pub fn faithfulness_probe(
    phi: &PhaseSpaceFunction,
    rho: &GridAction,
) -> Result<FaithfulnessReport> {
    let op = weyl_quantize(phi, rho)?;
    let operator_norm = op_norm(&op);
    let phi_sup = phi.sup_norm();
    let bound_constant = rho.grid().spatial_len() as f64;
    let empirical_constant = if operator_norm > 0.0 {
        phi_sup / operator_norm
    } else if phi_sup == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let slack = 1e-10 * (1.0 + phi_sup);
    Ok(FaithfulnessReport {
        phi_sup,
        operator_norm,
        bound_constant,
        empirical_constant,
        consistent: phi_sup <= bound_constant * operator_norm + slack,
    })
}
