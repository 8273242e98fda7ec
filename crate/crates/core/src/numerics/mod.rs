//! Dense complex linear algebra: matrices, Hermitian spectra, tensor products,
//! partial traces and Hilbert-Schmidt geometry.

mod eig;
mod matrix;

pub use eig::{
    block_spectrum, eig_hermitian, eigenvalues_hermitian, operator_norm_hermitian, psd_sqrt,
    HermitianEig, HERMITIAN_TOL, PSD_TOL,
};
pub use matrix::{sigma_x, sigma_y, sigma_z, ComplexMatrix, C64};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// `base * max(1, ||a||_F)`.
pub fn relative_tolerance(base: f64, a: &ComplexMatrix) -> f64 {
    base * a.frobenius_norm().max(1.0)
}

/// Hilbert-Schmidt inner product `Tr(A^* B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!(
            "hs_inner of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(hs_inner_unchecked(a, b))
}

pub(crate) fn hs_inner_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Kronecker product; entry `(i_a * rows_b + i_b, j_a * cols_b + j_b)` is `a[i_a, j_a] b[i_b, j_b]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = b.shape();
    ComplexMatrix::from_fn(a.rows() * rb, a.cols() * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Which tensor factor [`partial_trace`] removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracedFactor {
    First,
    Second,
}

/// Partial trace of an operator on `C^{dim_first} (x) C^{dim_second}`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_first: usize,
    dim_second: usize,
    traced: TracedFactor,
) -> Result<ComplexMatrix> {
    let total = dim_first * dim_second;
    if !m.is_square() || m.rows() != total || total == 0 {
        return Err(Error::dim(format!(
            "partial trace of a {}x{} matrix over factors {dim_first} x {dim_second}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(match traced {
        TracedFactor::Second => ComplexMatrix::from_fn(dim_first, dim_first, |i, j| {
            (0..dim_second)
                .map(|k| m[(i * dim_second + k, j * dim_second + k)])
                .sum()
        }),
        TracedFactor::First => ComplexMatrix::from_fn(dim_second, dim_second, |i, j| {
            (0..dim_first)
                .map(|k| m[(k * dim_second + i, k * dim_second + j)])
                .sum()
        }),
    })
}

/// Modified Gram-Schmidt in the Hilbert-Schmidt inner product, with one
/// reorthogonalization pass.
///
/// An input whose residual has HS norm `<= rank_tol * max(1, largest input norm)`
/// is dropped. Input order determines the output.
pub fn orthonormalize_hs(mats: &[ComplexMatrix], rank_tol: f64) -> Result<Vec<ComplexMatrix>> {
    if rank_tol.is_nan() || rank_tol <= 0.0 {
        return Err(Error::Parameter(format!(
            "rank_tol must be positive, got {rank_tol}"
        )));
    }
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    if let Some(bad) = mats.iter().find(|m| m.shape() != first.shape()) {
        return Err(Error::dim(format!(
            "orthonormalize_hs mixes {}x{} and {}x{}",
            first.rows(),
            first.cols(),
            bad.rows(),
            bad.cols()
        )));
    }
    let threshold = rank_tol * mats.iter().map(|m| m.frobenius_norm()).fold(1.0, f64::max);
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for m in mats {
        let mut w = m.clone();
        for _ in 0..2 {
            for e in &basis {
                let c = hs_inner_unchecked(e, &w);
                for (x, y) in w.data_mut().iter_mut().zip(e.as_slice()) {
                    *x -= c * y;
                }
            }
        }
        let norm = w.frobenius_norm();
        if norm > threshold {
            basis.push(w.scale_real(1.0 / norm));
        }
    }
    Ok(basis)
}

/// Real-vector counterpart of [`orthonormalize_hs`], same dropping rule.
pub(crate) fn orthonormalize_real(vecs: &[Vec<f64>], rank_tol: f64) -> Vec<Vec<f64>> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = rank_tol * vecs.iter().map(|v| norm(v)).fold(1.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &basis {
                let c: f64 = e.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (x, y) in w.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
        }
        let n = norm(&w);
        if n > threshold {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
    }
    basis
}

/// Gram-Schmidt with column pivoting over real vectors.
///
/// `fixed` vectors are taken first, in order. The `candidates` are then consumed
/// largest-residual-first; the process stops once every remaining residual is
/// `<= rank_tol * max(1, largest input norm)`. Pivoting keeps the rank decision
/// well conditioned when a candidate mixes many directions with very different
/// weights. Ties go to the lower index, so the output is deterministic.
pub(crate) fn orthonormalize_real_pivoted(
    fixed: &[Vec<f64>],
    candidates: &[Vec<f64>],
    rank_tol: f64,
) -> Vec<Vec<f64>> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let threshold = rank_tol
        * fixed
            .iter()
            .chain(candidates)
            .map(|v| norm(v))
            .fold(1.0, f64::max);
    let mut basis = orthonormalize_real(fixed, rank_tol);
    let mut residuals: Vec<Vec<f64>> = candidates.to_vec();
    for r in residuals.iter_mut() {
        for e in &basis {
            let c = dot(e, r);
            r.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
        }
    }
    let mut alive: Vec<bool> = vec![true; residuals.len()];
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in residuals.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            let n = norm(r);
            if best.is_none_or(|(_, b)| n > b) {
                best = Some((i, n));
            }
        }
        let Some((i, n)) = best else { break };
        if n <= threshold {
            break;
        }
        alive[i] = false;
        let mut q = residuals[i].clone();
        // reorthogonalization pass
        for e in &basis {
            let c = dot(e, &q);
            q.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
        }
        let qn = norm(&q);
        if qn <= threshold {
            continue;
        }
        q.iter_mut().for_each(|x| *x /= qn);
        for (j, r) in residuals.iter_mut().enumerate() {
            if alive[j] {
                let c = dot(&q, r);
                r.iter_mut().zip(&q).for_each(|(x, y)| *x -= c * y);
            }
        }
        basis.push(q);
    }
    basis
}

/// Real coordinates of a Hermitian `n x n` matrix in an HS-orthonormal basis of the
/// real space of Hermitian matrices: the diagonal entries, then `sqrt(2) Re a_ij`
/// and `sqrt(2) Im a_ij` for `i < j`. The map is an isometry, so
/// `<x(A), x(B)> = Tr(A B)` for Hermitian `A, B`. Only the upper triangle is read.
pub fn hermitian_coordinates(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(a[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(s * a[(i, j)].re);
            out.push(s * a[(i, j)].im);
        }
    }
    out
}

/// Inverse of [`hermitian_coordinates`].
pub fn from_hermitian_coordinates(n: usize, x: &[f64]) -> ComplexMatrix {
    assert_eq!(x.len(), n * n, "expected {} Hermitian coordinates", n * n);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(x[i], 0.0);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(h * x[k], h * x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Matrix with i.i.d. complex Gaussian entries, `E|z|^2 = 1`.
pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(h * re, h * im)
    })
}

/// Random Hermitian matrix `(G + G^*)/2` with Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    random_gaussian(n, n, rng).hermitian_part()
}

/// Random density matrix `G G^* / Tr(G G^*)`.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_gaussian(n, n, rng);
    let rho = g.dot(&g.adjoint()).hermitian_part();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// Orthonormalizes the columns of a tall matrix (Gram-Schmidt with
/// reorthogonalization). Returns `None` if the columns are numerically dependent.
pub(crate) fn orthonormal_columns(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let (rows, cols) = m.shape();
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut w: Vec<C64> = (0..rows).map(|i| m[(i, j)]).collect();
        let scale = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for _ in 0..2 {
            for e in &q {
                let c: C64 = e.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in w.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
        }
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n.is_nan() || n <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        w.iter_mut().for_each(|z| *z /= n);
        q.push(w);
    }
    Some(ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i]))
}

/// Zero-filled `rows x cols` matrix with `block` placed at `(row0, col0)`.
pub(crate) fn embed_block(
    rows: usize,
    cols: usize,
    row0: usize,
    col0: usize,
    block: &ComplexMatrix,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            out[(row0 + i, col0 + j)] = block[(i, j)];
        }
    }
    out
}
