//! Dense complex linear algebra and unitary-normalized FFTs.
//!
//! Matrices are `nalgebra` dense matrices of `Complex64`; everything here is a
//! thin, shape-checked layer over it plus the few decompositions the rest of
//! the crate needs (numerical rank, null spaces, range bases of projectors).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// `e^{2πi·turns}`, exact at quarter turns.
pub fn cis_turns(turns: f64) -> C64 {
    let t = turns.rem_euclid(1.0);
    if t == 0.0 {
        ONE
    } else if t == 0.25 {
        C64::new(0.0, 1.0)
    } else if t == 0.5 {
        C64::new(-1.0, 0.0)
    } else if t == 0.75 {
        C64::new(0.0, -1.0)
    } else {
        let a = 2.0 * PI * t;
        C64::new(a.cos(), a.sin())
    }
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b)
}

/// `a·b`, skipping the zero entries of `b`. Exact; O(n²) when `b` is monomial.
pub fn mul_sparse(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "mul_sparse shape mismatch");
    let rows = a.nrows();
    let mut out = CMatrix::zeros(rows, b.ncols());
    let (src, dst) = (a.as_slice(), out.as_mut_slice());
    for (j, bcol) in b.as_slice().chunks_exact(b.nrows().max(1)).enumerate() {
        let target = &mut dst[j * rows..(j + 1) * rows];
        for (k, &c) in bcol.iter().enumerate() {
            if c != ZERO {
                for (o, &v) in target.iter_mut().zip(&src[k * rows..(k + 1) * rows]) {
                    *o += c * v;
                }
            }
        }
    }
    out
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// Largest entry modulus.
pub fn norm_max(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn norm_fro(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a)[0]
}

/// `‖a − b‖_max`; panics on shape mismatch.
pub fn diff_max(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "diff_max shape mismatch");
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = (x - y).norm_sqr();
        if d.is_nan() {
            return f64::NAN;
        }
        worst = worst.max(d);
    }
    worst.sqrt()
}

/// `‖a − I‖_max` for a square matrix.
pub fn identity_defect(a: &CMatrix) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let target = if i == j { ONE } else { ZERO };
            m = m.max((a[(i, j)] - target).norm());
        }
    }
    m
}

/// `‖U*U − I‖_max`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    identity_defect(&(u.adjoint() * u))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Integer power by repeated squaring.
pub fn mat_pow(a: &CMatrix, mut k: u64) -> CMatrix {
    let mut result = CMatrix::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn check_finite(a: &CMatrix, what: &str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} has non-finite entries")))
    }
}

/// Null space of a matrix: count and orthonormal basis (as columns).
#[derive(Debug, Clone)]
pub struct NullSpace {
    pub dim: usize,
    pub basis: CMatrix,
    pub singular_values: Vec<f64>,
}

/// Singular values with left and right singular vectors, sorted descending.
/// Wide inputs are padded with zero rows so that every right singular vector
/// is returned.
fn sorted_svd(a: &CMatrix) -> (Vec<f64>, CMatrix, CMatrix) {
    let (m, n) = a.shape();
    let rows = m.max(n);
    let work = faer::Mat::<C64>::from_fn(rows, n, |i, j| if i < m { a[(i, j)] } else { ZERO });
    let size = n;
    let svd = work.svd().expect("SVD did not converge");
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let sv: Vec<f64> = (0..size).map(|k| s[k].re).collect();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap().then(i.cmp(&j)));
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let u_sorted = CMatrix::from_fn(m, size, |r, c| u[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(n, size, |r, c| v[(r, order[c])]);
    (sorted, u_sorted, v_sorted)
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let work = faer::Mat::<C64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let evd = work
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition did not converge");
    let (u, s) = (evd.U(), evd.S());
    let values = (0..a.nrows()).map(|k| s[k].re).collect();
    (
        values,
        CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| u[(i, j)]),
    )
}

/// Singular values sorted descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let work = faer::Mat::<C64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let mut sv = work.singular_values().expect("SVD did not converge");
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Null space with relative cutoff: singular values `≤ cutoff·σ_max` count.
pub fn nullspace(a: &CMatrix, cutoff: f64) -> Result<NullSpace> {
    if a.is_empty() {
        return Err(Error::Shape("null space of an empty matrix".into()));
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::Numerical(format!("cutoff {cutoff} outside (0,1)")));
    }
    check_finite(a, "null-space input")?;
    let (sv, _, v) = sorted_svd(a);
    let smax = sv.first().cloned().unwrap_or(0.0);
    let threshold = cutoff * smax;
    let cols: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= threshold).collect();
    let mut basis = CMatrix::from_fn(v.nrows(), cols.len(), |r, c| v[(r, cols[c])]);
    for mut col in basis.column_iter_mut() {
        normalize_phase(col.as_mut_slice());
    }
    Ok(NullSpace {
        dim: cols.len(),
        basis,
        singular_values: sv,
    })
}

/// Number of singular values strictly above `cutoff·σ_max`.
pub fn numerical_rank(a: &CMatrix, cutoff: f64) -> usize {
    let sv = singular_values(a);
    let smax = sv.first().cloned().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > cutoff * smax).count()
}

/// Orthonormal basis of the range: left singular vectors whose singular value
/// exceeds `cutoff·scale`, where `scale = max(σ_max, floor)`. Columns are
/// ordered by descending singular value and phase-normalized.
pub fn range_basis(a: &CMatrix, cutoff: f64, floor: f64) -> CMatrix {
    if a.is_empty() {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let (sv, u, _) = sorted_svd(a);
    let scale = sv.first().cloned().unwrap_or(0.0).max(floor);
    let keep = sv
        .iter()
        .take(a.nrows())
        .filter(|&&s| s > cutoff * scale)
        .count();
    let mut basis = u.columns(0, keep).into_owned();
    for mut col in basis.column_iter_mut() {
        normalize_phase(col.as_mut_slice());
    }
    basis
}

/// Range of a Hermitian projector by pivoted Gram–Schmidt on its columns.
/// Much cheaper than an SVD when the rank is small; only valid for matrices
/// whose nonzero singular values are all close to one.
pub fn projector_range(p: &CMatrix, tol: f64) -> CMatrix {
    let d = p.nrows();
    let mut residual = p.clone();
    let mut basis: Vec<CVector> = Vec::new();
    loop {
        let (best, norm) = (0..residual.ncols())
            .map(|j| (j, residual.column(j).norm()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= tol || basis.len() == d {
            break;
        }
        let mut q: CVector = residual.column(best) / C64::new(norm, 0.0);
        // second pass keeps q orthogonal to earlier vectors at roundoff level
        for b in &basis {
            let c = b.dotc(&q);
            q -= b * c;
        }
        let qn = q.norm();
        q /= C64::new(qn, 0.0);
        let proj = q.adjoint() * &residual;
        residual -= &q * proj;
        basis.push(q);
    }
    let mut out = CMatrix::zeros(d, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    for mut col in out.column_iter_mut() {
        normalize_phase(col.as_mut_slice());
    }
    out
}

/// Rotate `v` so that its first entry of maximal modulus is real and positive.
pub fn normalize_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap();
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// Standard inner product `⟨f,g⟩ = Σ f·conj(g)`, linear in the first slot.
pub fn inner(f: &[C64], g: &[C64]) -> C64 {
    f.iter().zip(g).map(|(a, b)| a * b.conj()).sum()
}

// ---------------------------------------------------------------------------
// FFT

/// Cached forward/inverse plans for one transform length.
#[derive(Clone)]
pub struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPlan {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized `Σ_j x_j e^{∓2πi jk/N}` in place.
    pub fn raw(&self, data: &mut [C64], inverse: bool) {
        if inverse {
            self.inverse.process(data);
        } else {
            self.forward.process(data);
        }
    }

    /// Unitary transform in place (`1/√N` each way).
    pub fn unitary(&self, data: &mut [C64], inverse: bool) {
        self.raw(data, inverse);
        let s = 1.0 / (self.len as f64).sqrt();
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    /// Unnormalized transform along every axis of a row-major cube with
    /// `axes` axes of length `len`.
    pub fn raw_nd(&self, data: &mut [C64], axes: usize, inverse: bool) {
        let n = self.len;
        assert_eq!(data.len(), n.pow(axes as u32));
        let mut line = vec![ZERO; n];
        for axis in 0..axes {
            let stride = n.pow((axes - 1 - axis) as u32);
            let block = stride * n;
            for outer in (0..data.len()).step_by(block) {
                for inner_off in 0..stride {
                    let base = outer + inner_off;
                    for (k, z) in line.iter_mut().enumerate() {
                        *z = data[base + k * stride];
                    }
                    self.raw(&mut line, inverse);
                    for (k, z) in line.iter().enumerate() {
                        data[base + k * stride] = *z;
                    }
                }
            }
        }
    }
}

/// Unitary forward DFT `X_k = N^{-1/2} Σ_j x_j e^{−2πi jk/N}`.
pub fn fft(x: &[C64]) -> Vec<C64> {
    let mut out = x.to_vec();
    if !out.is_empty() {
        FftPlan::new(x.len()).unitary(&mut out, false);
    }
    out
}

/// Unitary inverse DFT.
pub fn ifft(x: &[C64]) -> Vec<C64> {
    let mut out = x.to_vec();
    if !out.is_empty() {
        FftPlan::new(x.len()).unitary(&mut out, true);
    }
    out
}

/// Unitary 2-d DFT of a row-major `rows × cols` array.
pub fn fft2(x: &[C64], rows: usize, cols: usize, inverse: bool) -> Vec<C64> {
    assert_eq!(x.len(), rows * cols, "fft2 shape mismatch");
    let mut out = x.to_vec();
    let row_plan = FftPlan::new(cols);
    for r in 0..rows {
        row_plan.unitary(&mut out[r * cols..(r + 1) * cols], inverse);
    }
    let col_plan = FftPlan::new(rows);
    let mut line = vec![ZERO; rows];
    for c in 0..cols {
        for r in 0..rows {
            line[r] = out[r * cols + c];
        }
        col_plan.unitary(&mut line, inverse);
        for r in 0..rows {
            out[r * cols + c] = line[r];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random fixtures

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex standard Gaussian (`E|z|² = 1`).
pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / 2f64.sqrt()
}

pub fn random_vector<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`. Deterministic per seed.
pub fn haar_random_unitary(dim: usize, seed: u64) -> CMatrix {
    assert!(dim >= 1, "haar_random_unitary needs dim >= 1");
    let mut rng = seeded_rng(seed);
    let z = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Rows of `re,im` pairs, one matrix row per line.
pub fn matrix_to_csv(a: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols())
            .map(|j| format!("{:.17e},{:.17e}", a[(i, j)].re, a[(i, j)].im))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = seeded_rng(seed);
        CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng))
    }

    #[test]
    fn identity_is_neutral_and_adjoint_involutive() {
        let a = random_matrix(5, 5, 1);
        let i = CMatrix::identity(5, 5);
        assert_eq!(matmul(&i, &a).unwrap(), a);
        assert_eq!(adjoint(&adjoint(&a)), a);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = random_matrix(2, 3, 1);
        assert!(matches!(matmul(&a, &a), Err(Error::Shape(_))));
    }

    #[test]
    fn frobenius_of_row() {
        let a = CMatrix::from_row_slice(1, 2, &[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
        assert!((norm_fro(&a).powi(2) - 25.0).abs() < 1e-12);
        assert_eq!(norm_max(&a), 4.0);
    }

    #[test]
    fn nullspace_dimensions() {
        assert_eq!(nullspace(&CMatrix::identity(4, 4), 1e-8).unwrap().dim, 0);
        assert_eq!(nullspace(&CMatrix::zeros(3, 3), 1e-8).unwrap().dim, 3);

        let u = random_vector(4, &mut seeded_rng(3));
        let v = random_vector(4, &mut seeded_rng(4));
        let outer = &u * v.adjoint();
        let ns = nullspace(&outer, 1e-8).unwrap();
        assert_eq!(ns.dim, 3);
        // the only nonzero singular value of u v* is |u||v|
        assert!((ns.singular_values[0] - u.norm() * v.norm()).abs() < 1e-12);
        // basis is orthonormal and annihilated
        assert!(identity_defect(&(ns.basis.adjoint() * &ns.basis)) < 1e-12);
        assert!(norm_max(&(&outer * &ns.basis)) < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix_counts_missing_rows() {
        let a = random_matrix(2, 5, 9);
        let ns = nullspace(&a, 1e-8).unwrap();
        assert_eq!(ns.dim, 3);
        assert!(norm_max(&(&a * &ns.basis)) < 1e-12);
    }

    #[test]
    fn nullspace_rejects_empty() {
        assert!(nullspace(&CMatrix::zeros(0, 0), 1e-8).is_err());
    }

    #[test]
    fn fft_delta_is_flat() {
        let mut x = vec![ZERO; 8];
        x[0] = ONE;
        for z in fft(&x) {
            assert!((z.norm() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn fft_round_trip_and_parseval() {
        for &n in &[1usize, 6, 12, 64, 100, 256] {
            let x: Vec<C64> = random_vector(n, &mut seeded_rng(n as u64))
                .iter()
                .cloned()
                .collect();
            let y = fft(&x);
            let back = ifft(&y);
            let err = x
                .iter()
                .zip(&back)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(err < 1e-12, "n={n} round trip {err}");
            let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((nx - ny).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_direct_dft() {
        let n = 12;
        let x: Vec<C64> = random_vector(n, &mut seeded_rng(5))
            .iter()
            .cloned()
            .collect();
        let y = fft(&x);
        for (k, yk) in y.iter().enumerate() {
            let direct: C64 = (0..n)
                .map(|j| x[j] * cis_turns(-((j * k) as f64) / n as f64))
                .sum::<C64>()
                / (n as f64).sqrt();
            assert!((direct - yk).norm() < 1e-12);
        }
    }

    #[test]
    fn fft2_round_trip() {
        let x: Vec<C64> = random_vector(48, &mut seeded_rng(6))
            .iter()
            .cloned()
            .collect();
        let y = fft2(&x, 6, 8, false);
        let back = fft2(&y, 6, 8, true);
        let err = x
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-12);
    }

    #[test]
    fn haar_unitary_properties() {
        let u = haar_random_unitary(12, 42);
        assert!(unitarity_defect(&u) < 1e-12);
        assert_eq!(u, haar_random_unitary(12, 42));
        assert_ne!(u, haar_random_unitary(12, 43));
        let s = haar_random_unitary(1, 7);
        assert!((s[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_range_matches_svd_rank() {
        let q = haar_random_unitary(10, 11).columns(0, 3).into_owned();
        let p = &q * q.adjoint();
        let basis = projector_range(&p, 1e-8);
        assert_eq!(basis.ncols(), 3);
        assert!(identity_defect(&(basis.adjoint() * &basis)) < 1e-12);
        assert!(diff_max(&(&basis * basis.adjoint()), &p) < 1e-12);
        assert_eq!(numerical_rank(&p, 1e-8), 3);
        assert_eq!(range_basis(&p, 1e-8, 1.0).ncols(), 3);
    }

    #[test]
    fn low_rank_range_and_nullspace_are_exact() {
        // rank-deficient inputs with structured zero patterns
        for (seed, d, r) in [(1u64, 8, 1), (2, 8, 3), (3, 16, 2), (4, 12, 5)] {
            let q = haar_random_unitary(d, seed).columns(0, r).into_owned();
            let mut p = &q * q.adjoint();
            let perm = CMatrix::from_fn(d, d, |i, j| if j == (i + 3) % d { ONE } else { ZERO });
            p = &perm * p * perm.adjoint();
            let b = range_basis(&p, 1e-8, 1.0);
            assert_eq!(b.ncols(), r);
            assert!(diff_max(&(&p * &b), &b) < 1e-12);
            let ns = nullspace(&p, 1e-8).unwrap();
            assert_eq!(ns.dim, d - r);
            assert!(norm_max(&(&p * &ns.basis)) < 1e-12);
            assert!((op_norm(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let x = haar_random_unitary(6, 4);
        let diag = CMatrix::from_diagonal(&CVector::from_fn(6, |i, _| {
            C64::new([2.0, -1.0, 0.5, 0.5, 3.0, -1.0][i], 0.0)
        }));
        let a = &x * diag * x.adjoint();
        let (vals, u) = hermitian_eigen(&a);
        assert_eq!(vals.len(), 6);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[5] - 3.0).abs() < 1e-12);
        assert!(identity_defect(&(u.adjoint() * &u)) < 1e-12);
        let back = &u
            * CMatrix::from_diagonal(&CVector::from_fn(6, |i, _| C64::new(vals[i], 0.0)))
            * u.adjoint();
        assert!(diff_max(&back, &a) < 1e-12);
    }

    #[test]
    fn mul_sparse_matches_dense() {
        let a = random_matrix(6, 5, 1);
        let mut b = random_matrix(5, 4, 2);
        b[(1, 2)] = ZERO;
        b[(3, 0)] = ZERO;
        assert!(diff_max(&mul_sparse(&a, &b), &(&a * &b)) < 1e-14);
    }

    #[test]
    fn diff_max_propagates_nan() {
        let a = random_matrix(3, 3, 1);
        let mut b = a.clone();
        b[(2, 1)] = C64::new(f64::NAN, 0.0);
        assert!(diff_max(&a, &b).is_nan());
        assert_eq!(diff_max(&a, &a), 0.0);
    }

    #[test]
    fn mat_pow_matches_repeated_product() {
        let a = random_matrix(4, 4, 2);
        let mut direct = CMatrix::identity(4, 4);
        for _ in 0..7 {
            direct = &direct * &a;
        }
        assert!(diff_max(&mat_pow(&a, 7), &direct) < 1e-9 * norm_max(&direct));
    }
}
