//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, plus the
//! spectral helpers built on it (PSD square root, operator norm, block spectra).

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::relative_tolerance;
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance for eigensolver input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative tolerance below which negative eigenvalues count as zero.
pub const PSD_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `A = U diag(eigenvalues) U^*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Sorted ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// `U f(diag) U^*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .filter(|&k| weights[k] != 0.0)
                .map(|k| u[(i, k)] * u[(j, k)].conj() * weights[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| l)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Input must be Hermitian within `1e-10 * max(1, ||A||_F)`; the solver works on
/// the symmetrized copy `(A + A^*)/2`. Output is deterministic for identical input.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEig> {
    check_hermitian(a)?;
    Ok(jacobi(&a.hermitian_part()))
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn eigenvalues_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>> {
    eig_hermitian(a).map(|e| e.eigenvalues)
}

/// Operator (spectral) norm of a Hermitian matrix, `max |lambda|`.
pub fn operator_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let ev = eigenvalues_hermitian(a)?;
    Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
}

/// Positive square root of a PSD matrix.
///
/// Eigenvalues in `[-1e-10 * max(1, ||A||_F), 0)` are clipped to zero; anything more
/// negative is rejected.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(a)?;
    let tol = relative_tolerance(PSD_TOL, a);
    if eig.min() < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
            tolerance: tol,
        });
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()).hermitian_part())
}

/// Sorted spectrum of a Hermitian matrix, computed block by block.
///
/// Indices are grouped into the connected components of the nonzero pattern; the
/// matrix is permutation-similar to the direct sum of those blocks, so the spectrum
/// is the union of the block spectra. Channels with disjoint output supports have
/// Choi matrices that split this way.
pub fn block_spectrum(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] != ZERO || a[(j, i)] != ZERO {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    let mut spectrum = Vec::with_capacity(n);
    for idx in groups {
        let block = ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| {
            (a[(idx[i], idx[j])] + a[(idx[j], idx[i])].conj()) * 0.5
        });
        spectrum.extend(jacobi(&block).eigenvalues);
    }
    spectrum.sort_by(f64::total_cmp);
    Ok(spectrum)
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::dim(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let tol = relative_tolerance(HERMITIAN_TOL, a);
    let defect = a.hermiticity_defect();
    if defect > tol {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian: ||A - A*||_F = {defect:e} > {tol:e}"
        )));
    }
    Ok(())
}

/// Cyclic Jacobi on an exactly Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and then
/// applies the real symmetric Jacobi rotation, so the combined plane rotation is
/// `G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]` with `a_pq = |a_pq| e^{i phi}`.
fn jacobi(a: &ComplexMatrix) -> HermitianEig {
    let n = a.rows();
    let mut a = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let negligible = f64::EPSILON * 1e-3 * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                if r <= negligible {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                rotated = true;
                let phase_conj = (apq / r).conj();
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = phase_conj * (-s);
                let g_qq = phase_conj * c;

                // A <- A G
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                // A <- G^* A
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                // V <- V G
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEig {
        eigenvalues,
        eigenvectors,
    }
}
