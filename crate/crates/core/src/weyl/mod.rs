//! A periodic grid model of `ℝⁿ` and its Heisenberg group.
//!
//! Spatial samples sit at `u_j = (j − N/2)h`, `j ∈ [0, N)ⁿ`; phase-space
//! points are `k = (x, y)` with `x = s·h` and `y = m/(Nh)` for integer
//! vectors `s, m`. On this grid `W_k = e^{πi s·m/N} U^s V^m`, where `U` is
//! the unit shift and `V = diag(e^{2πi(j−N/2)/N})`, so the Weyl operators are
//! exactly the finite Heisenberg group of `(Z/N)ⁿ` and the identities of the
//! continuum theory hold with quadrature weights `hⁿ` (space) and `N⁻ⁿ`
//! (phase space).
//!
//! Points outside the fundamental window are related to it by
//! `W_{k + N(a,b)} = (−1)^{a·m + b·s} W_k`; phase-space functions are
//! extended with the same sign so that `Φ(k)W_k` is periodic.

mod functions;
mod operators;
mod phase_space;
mod synth;
mod transform;

pub use functions::{
    continuous_fourier, gaussian, gaussian_symbol, grid_gaussian, hermite_expansion,
    hermite_function, hermite_inner, HermiteTerm,
};
pub use operators::{
    faithfulness_probe, weyl_operator, weyl_quantize, weyl_symbol, FaithfulnessReport, GridAction,
    GRID_RELATION_TOL,
};
pub use phase_space::PhaseSpaceFunction;
pub use synth::{
    eq2_check, gaussian_projector_symbol, projector_transport_defect, real_intertwiner_synth,
    Eq2Report, RealIsotypicDecomposition, REAL_TOL,
};
pub use transform::{
    fourier_wigner, fourier_wigner_midpoint, shifted_symbol, twisted_convolution,
    twisted_convolution_direct, twisted_convolution_via_operators,
};

use std::f64::consts::PI;

use serde::Serialize;

use crate::abelian::FiniteAbelianGroup;
use crate::error::{Error, Result};
use crate::numerics::{cis_turns, C64};

/// Minimal half-width `Nh/2` for Gaussian-class inputs.
pub const MIN_HALF_WIDTH: f64 = 4.0;

/// Largest phase-space grid (`N^{2n}` points) accepted.
pub const MAX_PHASE_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Spatial dimension.
    pub n: usize,
    /// Points per axis.
    #[serde(rename = "N")]
    pub points: usize,
    pub h: f64,
}

impl GridSpec {
    pub fn new(n: usize, points: usize, h: f64) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::structural(format!(
                "spatial dimension {n} not in {{1, 2}}"
            )));
        }
        if points < 2 || !points.is_multiple_of(2) {
            return Err(Error::structural(format!(
                "grid size N = {points} must be even and ≥ 2"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::structural(format!(
                "grid step h = {h} must be positive"
            )));
        }
        let phase = points
            .checked_pow(2 * n as u32)
            .filter(|&p| p <= MAX_PHASE_POINTS);
        if phase.is_none() {
            return Err(Error::structural(format!(
                "phase-space grid N^(2n) = {points}^{} exceeds {MAX_PHASE_POINTS} points",
                2 * n
            )));
        }
        Ok(GridSpec { n, points, h })
    }

    /// `n = 1, N = 128, h = 1/8`.
    pub fn default_1d() -> Self {
        GridSpec::new(1, 128, 0.125).expect("valid default grid")
    }

    pub fn half_width(&self) -> f64 {
        self.points as f64 * self.h / 2.0
    }

    /// Errors unless `Nh/2 ≥ 4`.
    pub fn require_window(&self) -> Result<()> {
        if self.half_width() + 1e-12 < MIN_HALF_WIDTH {
            return Err(Error::WindowTooSmall {
                half_width: self.half_width(),
                required: MIN_HALF_WIDTH,
            });
        }
        Ok(())
    }

    pub fn spatial_len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn phase_len(&self) -> usize {
        self.spatial_len() * self.spatial_len()
    }

    pub fn spatial_weight(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    /// `N⁻ⁿ = hⁿ·(1/(Nh))ⁿ`.
    pub fn phase_weight(&self) -> f64 {
        (self.points as f64).powi(-(self.n as i32))
    }

    pub fn frequency_step(&self) -> f64 {
        1.0 / (self.points as f64 * self.h)
    }

    /// `(Z/N)ⁿ`, whose Heisenberg group the Weyl operators realize.
    pub fn group(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(vec![self.points as u64; self.n]).expect("valid grid group")
    }

    /// Row-major multi-index, axis 0 most significant.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for axis in (0..self.n).rev() {
            out[axis] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn ravel_residues(&self, r: &[i64]) -> usize {
        let n = self.points as i64;
        r.iter()
            .fold(0, |acc, &v| acc * self.points + v.rem_euclid(n) as usize)
    }

    /// `u_j` per axis.
    pub fn coordinate(&self, idx: usize) -> Vec<f64> {
        self.unravel(idx)
            .into_iter()
            .map(|j| (j as f64 - self.points as f64 / 2.0) * self.h)
            .collect()
    }

    /// Residue `r ∈ [0, N)` to its representative in `[−N/2, N/2)`.
    pub fn centered(&self, r: usize) -> i64 {
        let n = self.points as i64;
        let r = r as i64;
        if r < n / 2 {
            r
        } else {
            r - n
        }
    }

    /// Every phase point of the fundamental window, in storage order.
    pub fn phase_points(&self) -> Vec<PhasePoint> {
        (0..self.phase_len())
            .map(|p| PhasePoint::from_index(self, p))
            .collect()
    }

    /// `e^{πi·num/N}` for an integer numerator, exact at quarter turns.
    pub fn half_phase(&self, num: i64) -> C64 {
        let two_n = 2 * self.points as i64;
        cis_turns(num.rem_euclid(two_n) as f64 / two_n as f64)
    }
}

/// A lattice point `(s, m)` of phase space: `x = s·h`, `y = m/(Nh)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PhasePoint {
    pub s: Vec<i64>,
    pub m: Vec<i64>,
}

impl PhasePoint {
    pub fn new(s: Vec<i64>, m: Vec<i64>) -> Self {
        assert_eq!(s.len(), m.len(), "position and frequency lengths differ");
        PhasePoint { s, m }
    }

    pub fn zero(n: usize) -> Self {
        PhasePoint::new(vec![0; n], vec![0; n])
    }

    /// The point with coordinates `(x, y)`; off-grid input is an error.
    pub fn from_coordinates(grid: &GridSpec, x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != grid.n || y.len() != grid.n {
            return Err(Error::Shape(format!(
                "phase point of dimension ({}, {}) on a grid with n = {}",
                x.len(),
                y.len(),
                grid.n
            )));
        }
        let snap = |v: f64, step: f64| -> Result<i64> {
            let r = v / step;
            if !r.is_finite() || (r - r.round()).abs() > 1e-9 * r.abs().max(1.0) {
                return Err(Error::OffGrid(format!("{v} is not a multiple of {step}")));
            }
            Ok(r.round() as i64)
        };
        let s = x.iter().map(|&v| snap(v, grid.h)).collect::<Result<_>>()?;
        let m = y
            .iter()
            .map(|&v| snap(v, grid.frequency_step()))
            .collect::<Result<_>>()?;
        Ok(PhasePoint::new(s, m))
    }

    /// The window point stored at position `p`.
    pub fn from_index(grid: &GridSpec, p: usize) -> Self {
        let len = grid.spatial_len();
        let s = grid
            .unravel(p / len)
            .into_iter()
            .map(|r| grid.centered(r))
            .collect();
        let m = grid
            .unravel(p % len)
            .into_iter()
            .map(|r| grid.centered(r))
            .collect();
        PhasePoint { s, m }
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn x(&self, grid: &GridSpec) -> Vec<f64> {
        self.s.iter().map(|&s| s as f64 * grid.h).collect()
    }

    pub fn y(&self, grid: &GridSpec) -> Vec<f64> {
        self.m
            .iter()
            .map(|&m| m as f64 * grid.frequency_step())
            .collect()
    }

    pub fn neg(&self) -> Self {
        PhasePoint::new(
            self.s.iter().map(|v| -v).collect(),
            self.m.iter().map(|v| -v).collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        PhasePoint::new(
            self.s.iter().zip(&o.s).map(|(a, b)| a + b).collect(),
            self.m.iter().zip(&o.m).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// `N·ω(k, l) = m_k·s_l − s_k·m_l`, so `ω(k,l) = y·u − x·v`.
    pub fn omega_numerator(&self, l: &Self) -> i64 {
        (0..self.n())
            .map(|i| self.m[i] * l.s[i] - self.s[i] * l.m[i])
            .sum()
    }

    pub fn omega(&self, l: &Self, grid: &GridSpec) -> f64 {
        self.omega_numerator(l) as f64 / grid.points as f64
    }

    /// The window representative and the sign `(−1)^{a·m + b·s}` relating
    /// `W` at this point to `W` at the representative.
    pub fn reduce(&self, grid: &GridSpec) -> (PhasePoint, f64) {
        let n = grid.points as i64;
        let half = n / 2;
        let mut parity = 0i64;
        let split = |v: i64| -> (i64, i64) {
            let a = (v + half).div_euclid(n);
            (v - a * n, a)
        };
        let mut s = Vec::with_capacity(self.n());
        let mut m = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let (s0, a) = split(self.s[i]);
            let (m0, b) = split(self.m[i]);
            parity += a * m0 + b * s0;
            s.push(s0);
            m.push(m0);
        }
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        (PhasePoint { s, m }, sign)
    }

    /// Storage position of the window representative.
    pub fn index(&self, grid: &GridSpec) -> usize {
        grid.ravel_residues(&self.s) * grid.spatial_len() + grid.ravel_residues(&self.m)
    }
}

/// Aliasing error of Gaussian-class phase-space quantities over the whole
/// window: the nearest image sits `1/h` away, so at the frequency edge
/// `1/(2h)` it contributes `e^{−π/(8h²)}`. Plus the window tail
/// `e^{−π(Nh/2)²/2}`.
pub fn discretization_error(grid: &GridSpec) -> f64 {
    let alias = 2.0 * (-PI / (8.0 * grid.h * grid.h)).exp();
    let w = grid.half_width();
    let tail = (-PI * w * w / 2.0).exp();
    alias + tail
}

/// `base`, widened on coarse grids to ten times the expected
/// discretization error.
pub fn grid_tolerance(grid: &GridSpec, base: f64) -> f64 {
    base.max(10.0 * discretization_error(grid))
}
