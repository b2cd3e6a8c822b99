//! Sampled Gaussian and Hermite functions, and the quadrature Fourier
//! transform `f̂(ξ) = ∫ f(u) e^{−2πiuξ} du` on the grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{FftPlan, C64};

use super::{GridSpec, PhaseSpaceFunction};

/// `φ(u) = 2^{n/4} e^{−π|u|²}`, sampled. Needs `Nh/2 ≥ 4`.
pub fn gaussian(grid: &GridSpec) -> Result<Vec<C64>> {
    grid.require_window()?;
    let c = 2f64.powf(grid.n as f64 / 4.0);
    Ok((0..grid.spatial_len())
        .map(|j| {
            let r2: f64 = grid.coordinate(j).iter().map(|u| u * u).sum();
            C64::new(c * (-PI * r2).exp(), 0.0)
        })
        .collect())
}

/// The Gaussian rescaled to unit norm under the `hⁿ` quadrature.
pub fn grid_gaussian(grid: &GridSpec) -> Result<Vec<C64>> {
    let mut phi = gaussian(grid)?;
    let norm = (grid.spatial_weight() * phi.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    for z in phi.iter_mut() {
        *z /= norm;
    }
    Ok(phi)
}

/// `e^{−π(|x|²+|y|²)/2}`, the Fourier–Wigner transform of `φ` with itself.
pub fn gaussian_symbol(grid: &GridSpec) -> PhaseSpaceFunction {
    PhaseSpaceFunction::from_fn(grid, |k| {
        let r2: f64 = k
            .x(grid)
            .iter()
            .chain(k.y(grid).iter())
            .map(|v| v * v)
            .sum();
        C64::new((-PI * r2 / 2.0).exp(), 0.0)
    })
}

/// `ψ_0, …, ψ_{order}` at one point, orthonormal in `L²(ℝ)`:
/// `ψ_0 = 2^{1/4}e^{−πu²}`,
/// `ψ_{k+1} = √(2/(k+1))·t·ψ_k − √(k/(k+1))·ψ_{k−1}`, `t = √(2π)u`.
fn hermite_values(order: usize, u: f64) -> Vec<f64> {
    let t = (2.0 * PI).sqrt() * u;
    let mut out = Vec::with_capacity(order + 1);
    out.push(2f64.powf(0.25) * (-PI * u * u).exp());
    for k in 0..order {
        let kf = k as f64;
        let prev = if k == 0 { 0.0 } else { out[k - 1] };
        let next = (2.0 / (kf + 1.0)).sqrt() * t * out[k] - (kf / (kf + 1.0)).sqrt() * prev;
        out.push(next);
    }
    out
}

/// `ψ_{k_1}(u_1)···ψ_{k_n}(u_n)` sampled on the grid.
pub fn hermite_function(grid: &GridSpec, orders: &[usize]) -> Result<Vec<C64>> {
    if orders.len() != grid.n {
        return Err(Error::Shape(format!(
            "{} Hermite orders on a grid with n = {}",
            orders.len(),
            grid.n
        )));
    }
    Ok((0..grid.spatial_len())
        .map(|j| {
            let v: f64 = grid
                .coordinate(j)
                .iter()
                .zip(orders)
                .map(|(&u, &k)| hermite_values(k, u)[k])
                .product();
            C64::new(v, 0.0)
        })
        .collect())
}

/// One term `c·ψ_k` of a Hermite expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTerm {
    pub orders: Vec<usize>,
    pub coefficient: C64,
}

/// `Σ c·ψ_k` sampled on the grid.
pub fn hermite_expansion(grid: &GridSpec, terms: &[HermiteTerm]) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); grid.spatial_len()];
    for t in terms {
        for (o, v) in out.iter_mut().zip(hermite_function(grid, &t.orders)?) {
            *o += t.coefficient * v;
        }
    }
    Ok(out)
}

/// Exact `⟨a, b⟩` of two Hermite expansions, by orthonormality.
pub fn hermite_inner(a: &[HermiteTerm], b: &[HermiteTerm]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for x in a {
        for y in b.iter().filter(|y| y.orders == x.orders) {
            s += x.coefficient * y.coefficient.conj();
        }
    }
    s
}

/// `f̂(ξ_r) ≈ hⁿ Σ_j f(u_j) e^{−2πi u_j·ξ_r}` at `ξ_r = (r − N/2)/(Nh)`,
/// returned in the spatial index order.
pub fn continuous_fourier(grid: &GridSpec, f: &[C64]) -> Result<Vec<C64>> {
    if f.len() != grid.spatial_len() {
        return Err(Error::Shape(format!(
            "{} samples for a grid of {} points",
            f.len(),
            grid.spatial_len()
        )));
    }
    // (j−N/2)(r−N/2)/N = jr/N − j/2 − r/2 + N/4 per axis
    let checker = |idx: usize| -> f64 {
        if grid.unravel(idx).iter().sum::<usize>() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let mut data: Vec<C64> = f.iter().enumerate().map(|(j, z)| z * checker(j)).collect();
    FftPlan::new(grid.points).raw_nd(&mut data, grid.n, false);
    let global = if (grid.points / 2 * grid.n).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let w = grid.spatial_weight();
    Ok(data
        .into_iter()
        .enumerate()
        .map(|(r, z)| z * checker(r) * global * w)
        .collect())
}
