use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{FftPlan, C64, ZERO};

use super::operators::{weyl_quantize, weyl_symbol, GridAction};
use super::{GridSpec, PhasePoint, PhaseSpaceFunction};

fn check_len(grid: &GridSpec, f: &[C64], name: &str) -> Result<()> {
    if f.len() != grid.spatial_len() {
        return Err(Error::Shape(format!(
            "{name} has {} samples, grid has {}",
            f.len(),
            grid.spatial_len()
        )));
    }
    Ok(())
}

fn centered_vec(grid: &GridSpec, idx: usize) -> Vec<i64> {
    grid.unravel(idx)
        .into_iter()
        .map(|r| grid.centered(r))
        .collect()
}

/// `V(f,g)(k) = ⟨W_k f, g⟩`, exactly on the grid:
/// `hⁿ Σ_j e^{2πi y·(u_j − x/2)} f(u_j − x) conj g(u_j)`, one inverse FFT
/// over `j` per position shift `s`.
pub fn fourier_wigner(grid: &GridSpec, f: &[C64], g: &[C64]) -> Result<PhaseSpaceFunction> {
    check_len(grid, f, "f")?;
    check_len(grid, g, "g")?;
    let len = grid.spatial_len();
    let plan = FftPlan::new(grid.points);
    let w = grid.spatial_weight();
    let mut values = vec![ZERO; grid.phase_len()];
    values
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(sr, out)| {
            let s = centered_vec(grid, sr);
            let mut line: Vec<C64> = (0..len)
                .map(|j| {
                    let src: Vec<i64> = grid
                        .unravel(j)
                        .iter()
                        .zip(&s)
                        .map(|(&ji, si)| ji as i64 - si)
                        .collect();
                    f[grid.ravel_residues(&src)] * g[j].conj()
                })
                .collect();
            plan.raw_nd(&mut line, grid.n, true);
            for (mr, z) in line.iter().enumerate() {
                let m = centered_vec(grid, mr);
                // (−1)^{Σm} e^{−πi m·s/N} = e^{πi m·(−N − s)/N}
                let num: i64 = m
                    .iter()
                    .zip(&s)
                    .map(|(mi, si)| -mi * (grid.points as i64 + si))
                    .sum();
                out[mr] = z * grid.half_phase(num) * w;
            }
        });
    PhaseSpaceFunction::from_values(grid, values)
}

/// Band-limited shift `f(u − c)` per axis by spectral phase ramps; the
/// Nyquist mode is treated as the real cosine.
fn spectral_shift(grid: &GridSpec, plan: &FftPlan, f: &[C64], c: &[f64]) -> Vec<C64> {
    let mut data = f.to_vec();
    plan.raw_nd(&mut data, grid.n, false);
    let big_n = grid.points as f64;
    let df = grid.frequency_step();
    for (r, z) in data.iter_mut().enumerate() {
        let mut factor = C64::new(1.0, 0.0);
        for (axis, &ri) in grid.unravel(r).iter().enumerate() {
            if ri == grid.points / 2 {
                factor *= (std::f64::consts::PI * c[axis] / grid.h).cos();
            } else {
                let xi = grid.centered(ri) as f64 * df;
                factor *= C64::from_polar(1.0, -2.0 * std::f64::consts::PI * xi * c[axis]);
            }
        }
        *z *= factor / big_n.powi(grid.n as i32);
    }
    plan.raw_nd(&mut data, grid.n, true);
    data
}

/// The symmetric form `∫ e^{2πiy·u} f(u − x/2) conj g(u + x/2) du`, with
/// half-shifts done spectrally. Agrees with [`fourier_wigner`] up to the
/// band-limiting error of the inputs; kept as an independent check.
pub fn fourier_wigner_midpoint(
    grid: &GridSpec,
    f: &[C64],
    g: &[C64],
) -> Result<PhaseSpaceFunction> {
    check_len(grid, f, "f")?;
    check_len(grid, g, "g")?;
    let len = grid.spatial_len();
    let plan = FftPlan::new(grid.points);
    let w = grid.spatial_weight();
    let mut values = vec![ZERO; grid.phase_len()];
    values
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(sr, out)| {
            let s = centered_vec(grid, sr);
            let half: Vec<f64> = s.iter().map(|&v| v as f64 * grid.h / 2.0).collect();
            let minus: Vec<f64> = half.iter().map(|v| -v).collect();
            let fs = spectral_shift(grid, &plan, f, &half);
            let gs = spectral_shift(grid, &plan, g, &minus);
            let mut line: Vec<C64> = fs.iter().zip(&gs).map(|(a, b)| a * b.conj()).collect();
            plan.raw_nd(&mut line, grid.n, true);
            for (mr, z) in line.iter().enumerate() {
                let parity: usize = centered_vec(grid, mr)
                    .iter()
                    .map(|v| v.rem_euclid(2) as usize)
                    .sum();
                let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
                out[mr] = z * sign * w;
            }
        });
    PhaseSpaceFunction::from_values(grid, values)
}

/// `Φ#Ψ(k) = N⁻ⁿ Σ_l e^{πiω(k−l,l)} Φ(k−l) Ψ(l)`.
///
/// For fixed position parts `s` (of `k`) and `s'` (of `l`) the sum over the
/// frequency part is a cyclic convolution after removing half-integer
/// modulations, so it is done in the Fourier domain and every `s'` is
/// accumulated there before a single inverse transform per `s`. Exact up to
/// rounding; [`twisted_convolution_direct`] is the plain sum.
pub fn twisted_convolution(
    phi: &PhaseSpaceFunction,
    psi: &PhaseSpaceFunction,
) -> Result<PhaseSpaceFunction> {
    phi.same_grid(psi)?;
    let grid = *phi.grid();
    let n = grid.n;
    let big_n = grid.points as i64;
    let len = grid.spatial_len();
    let plan = FftPlan::new(grid.points);
    let window: Vec<Vec<i64>> = (0..len).map(|i| centered_vec(&grid, i)).collect();
    let dot = |a: &[i64], b: &[i64]| -> i64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    // Ĝ_{s'} from G(m') = e^{−πi s'·m'/N} Ψ(s', m'), periodic in m'
    let g_hat: Vec<Vec<C64>> = (0..len)
        .into_par_iter()
        .map(|sp| {
            let s = &window[sp];
            let mut line: Vec<C64> = (0..len)
                .map(|mr| psi.values()[sp * len + mr] * grid.half_phase(-dot(s, &window[mr])))
                .collect();
            plan.raw_nd(&mut line, n, false);
            line
        })
        .collect();

    // P̂_D from P(μ) = e^{−πi ε·μ/N} Φ(D, μ), ε = D mod 2, for D = s − s'
    let span = 2 * grid.points - 1;
    let offsets: Vec<Vec<i64>> = (0..span.pow(n as u32))
        .map(|mut idx| {
            let mut d = vec![0i64; n];
            for axis in (0..n).rev() {
                d[axis] = (idx % span) as i64 - (big_n - 1);
                idx /= span;
            }
            d
        })
        .collect();
    let d_index = |d: &[i64]| -> usize {
        d.iter()
            .fold(0, |acc, &v| acc * span + (v + big_n - 1) as usize)
    };
    let p_hat: Vec<Vec<C64>> = offsets
        .par_iter()
        .map(|d| {
            let eps: Vec<i64> = d.iter().map(|v| v.rem_euclid(2)).collect();
            let mut line: Vec<C64> = (0..len)
                .map(|mr| {
                    let mu = &window[mr];
                    phi.get(&PhasePoint::new(d.clone(), mu.clone()))
                        * grid.half_phase(-dot(&eps, mu))
                })
                .collect();
            plan.raw_nd(&mut line, n, false);
            line
        })
        .collect();

    let norm = grid.phase_weight() / len as f64;
    let mut values = vec![ZERO; grid.phase_len()];
    values
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(sr, out)| {
            let s = &window[sr];
            let mut acc = vec![ZERO; len];
            for (sp, gh) in g_hat.iter().enumerate() {
                let s2 = &window[sp];
                let d: Vec<i64> = s.iter().zip(s2).map(|(a, b)| a - b).collect();
                let mut p = vec![0i64; n];
                let mut q = vec![0i64; n];
                for i in 0..n {
                    let eps = d[i].rem_euclid(2);
                    q[i] = (s[i] + eps - s2[i]) / 2;
                    p[i] = (s2[i] + eps - s[i]) / 2;
                }
                let ph = &p_hat[d_index(&d)];
                let np = grid.points;
                let shift = |v: i64| v.rem_euclid(big_n) as usize;
                if n == 1 {
                    let (pa, pb) = (shift(-p[0]), shift(q[0] - p[0]));
                    for r in 0..np {
                        acc[r] += ph[(r + pa) % np] * gh[(r + pb) % np];
                    }
                } else {
                    let (pa0, pb0) = (shift(-p[0]), shift(q[0] - p[0]));
                    let (pa1, pb1) = (shift(-p[1]), shift(q[1] - p[1]));
                    for r0 in 0..np {
                        let ra = (r0 + pa0) % np * np;
                        let rb = (r0 + pb0) % np * np;
                        let row = &mut acc[r0 * np..(r0 + 1) * np];
                        for (r1, z) in row.iter_mut().enumerate() {
                            *z += ph[ra + (r1 + pa1) % np] * gh[rb + (r1 + pb1) % np];
                        }
                    }
                }
            }
            plan.raw_nd(&mut acc, n, true);
            for (mr, z) in acc.iter().enumerate() {
                out[mr] = z * grid.half_phase(dot(s, &window[mr])) * norm;
            }
        });
    PhaseSpaceFunction::from_values(&grid, values)
}

/// The defining sum over the window, term by term, with the twisted
/// extension of `Φ`. Quartic in `N`; kept as an oracle.
pub fn twisted_convolution_direct(
    phi: &PhaseSpaceFunction,
    psi: &PhaseSpaceFunction,
) -> Result<PhaseSpaceFunction> {
    phi.same_grid(psi)?;
    let grid = *phi.grid();
    let n = grid.n;
    let big_n = grid.points as i64;
    let half = big_n / 2;
    let len = grid.spatial_len();
    let two_n = 2 * big_n;
    let table: Vec<C64> = (0..two_n).map(|t| grid.half_phase(t)).collect();
    // centered coordinates of every point, flattened as [s.., m..]
    let coords: Vec<i64> = (0..grid.phase_len())
        .flat_map(|p| {
            let k = PhasePoint::from_index(&grid, p);
            k.s.into_iter().chain(k.m)
        })
        .collect();
    let support: Vec<usize> = (0..grid.phase_len())
        .filter(|&p| psi.values()[p] != ZERO)
        .collect();
    let w = grid.phase_weight();
    let values: Vec<C64> = (0..grid.phase_len())
        .into_par_iter()
        .map(|kp| {
            let k = &coords[kp * 2 * n..(kp + 1) * 2 * n];
            let mut acc = ZERO;
            for &lp in &support {
                let l = &coords[lp * 2 * n..(lp + 1) * 2 * n];
                let mut num = 0i64;
                let mut parity = 0i64;
                let mut s_idx = 0usize;
                let mut m_idx = 0usize;
                let mut ds = [0i64; 2];
                let mut wraps = [0i64; 2];
                for i in 0..n {
                    num += k[n + i] * l[i] - k[i] * l[n + i];
                    let mut d = k[i] - l[i];
                    let mut a = 0;
                    if d < -half {
                        d += big_n;
                        a = -1;
                    } else if d >= half {
                        d -= big_n;
                        a = 1;
                    }
                    ds[i] = d;
                    wraps[i] = a;
                    s_idx = s_idx * grid.points + d.rem_euclid(big_n) as usize;
                }
                for i in 0..n {
                    let mut d = k[n + i] - l[n + i];
                    let mut b = 0;
                    if d < -half {
                        d += big_n;
                        b = -1;
                    } else if d >= half {
                        d -= big_n;
                        b = 1;
                    }
                    parity += wraps[i] * d + b * ds[i];
                    m_idx = m_idx * grid.points + d.rem_euclid(big_n) as usize;
                }
                let mut term = phi.values()[s_idx * len + m_idx] * psi.values()[lp];
                if parity & 1 == 1 {
                    term = -term;
                }
                acc += term * table[num.rem_euclid(two_n) as usize];
            }
            acc * w
        })
        .collect();
    PhaseSpaceFunction::from_values(&grid, values)
}

/// `Φ#Ψ` as the symbol of `W_Φ W_Ψ`; exact on the grid and much cheaper than
/// the direct sum.
pub fn twisted_convolution_via_operators(
    phi: &PhaseSpaceFunction,
    psi: &PhaseSpaceFunction,
) -> Result<PhaseSpaceFunction> {
    phi.same_grid(psi)?;
    let grid = *phi.grid();
    let canon = GridAction::canonical(&grid);
    let a = weyl_quantize(phi, &canon)? * weyl_quantize(psi, &canon)?;
    weyl_symbol(&grid, &a)
}

/// `Φ^k(l) = e^{πiω(k, l−k)} Φ(l−k)`, so that `ρ(W_k)ρ(W_Φ) = ρ(W_{Φ^k})`.
pub fn shifted_symbol(phi: &PhaseSpaceFunction, k: &PhasePoint) -> PhaseSpaceFunction {
    let grid = *phi.grid();
    PhaseSpaceFunction::from_fn(&grid, |l| {
        let d = l.sub(k);
        phi.get(&d) * grid.half_phase(k.omega_numerator(&d))
    })
}
