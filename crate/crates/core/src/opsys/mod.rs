//! Operator systems: self-adjoint, unital subspaces of `M_n`, stored through an
//! HS-orthonormal Hermitian basis of their self-adjoint part.
//!
//! All subspace geometry runs in the `n^2`-dimensional real space of Hermitian
//! matrices (see [`hermitian_coordinates`]). A complex span `S` and its Hermitian
//! part `S_sa` have the same dimension, so `dim_C S = dim_R S_sa = basis.len()`.

mod effects;

pub use effects::{
    duan_effect_basis, geometric_effect_sequence, EffectBasis, EffectCheck, EffectKind,
    EffectTolerance, GeometricBounds,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{
    from_hermitian_coordinates, hermitian_coordinates, orthonormalize_real_pivoted,
    random_hermitian, relative_tolerance, ComplexMatrix, HERMITIAN_TOL,
};

/// Rank tolerance used when orthonormalizing generators.
pub const RANK_TOL: f64 = 1e-9;
/// Default tolerance for span membership and subspace equality.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Hermitian parts at or below this fraction of the largest generator are roundoff.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct OperatorSystem {
    dim_h: usize,
    basis: Vec<ComplexMatrix>,
    coords: Vec<Vec<f64>>,
}

impl OperatorSystem {
    /// Smallest operator system containing `gens`.
    ///
    /// The identity is adjoined first and every generator `G` contributes its two
    /// Hermitian parts `(G + G^*)/2` and `(G - G^*)/(2i)`. Parts at the noise floor
    /// are discarded and the rest are normalized before pivoted Gram-Schmidt, which
    /// makes the rank decision independent of generator scale.
    pub fn from_generators(dim_h: usize, gens: &[ComplexMatrix]) -> Result<Self> {
        if dim_h == 0 {
            return Err(Error::dim("operator system on a zero-dimensional space"));
        }
        if let Some(g) = gens.iter().find(|g| g.shape() != (dim_h, dim_h)) {
            return Err(Error::dim(format!(
                "generator of shape {}x{} in an operator system on C^{dim_h}",
                g.rows(),
                g.cols()
            )));
        }
        let mut parts = Vec::with_capacity(2 * gens.len());
        for g in gens {
            parts.push(g.hermitian_part());
            parts.push(g.skew_hermitian_part());
        }
        let norms: Vec<f64> = parts.iter().map(|p| p.frobenius_norm()).collect();
        let floor = NOISE_FLOOR * norms.iter().copied().fold(1.0, f64::max);
        let candidates: Vec<Vec<f64>> = parts
            .iter()
            .zip(&norms)
            .filter(|(_, &norm)| norm > floor)
            .map(|(p, &norm)| {
                let mut x = hermitian_coordinates(p);
                x.iter_mut().for_each(|v| *v /= norm);
                x
            })
            .collect();
        let unit = hermitian_coordinates(
            &ComplexMatrix::identity(dim_h).scale_real(1.0 / (dim_h as f64).sqrt()),
        );
        let coords = orthonormalize_real_pivoted(&[unit], &candidates, RANK_TOL);
        let basis = coords
            .iter()
            .map(|x| from_hermitian_coordinates(dim_h, x))
            .collect();
        Ok(Self {
            dim_h,
            basis,
            coords,
        })
    }

    /// Adopts an already HS-orthonormal Hermitian basis, checking every invariant at
    /// tolerance `tol`.
    pub fn from_hermitian_basis(dim_h: usize, basis: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        if dim_h == 0 {
            return Err(Error::dim("operator system on a zero-dimensional space"));
        }
        if basis.is_empty() || basis.len() > dim_h * dim_h {
            return Err(Error::validation(
                "dimension",
                format!("{} basis elements for a system in M_{dim_h}", basis.len()),
            ));
        }
        for (k, b) in basis.iter().enumerate() {
            if b.shape() != (dim_h, dim_h) {
                return Err(Error::dim(format!(
                    "basis element {k} has shape {}x{}, expected {dim_h}x{dim_h}",
                    b.rows(),
                    b.cols()
                )));
            }
            if b.hermiticity_defect() > relative_tolerance(tol, b) {
                return Err(Error::validation(
                    "hermiticity",
                    format!(
                        "basis element {k} deviates from its adjoint by {:e}",
                        b.hermiticity_defect()
                    ),
                ));
            }
        }
        let basis: Vec<ComplexMatrix> = basis.iter().map(|b| b.hermitian_part()).collect();
        let coords: Vec<Vec<f64>> = basis.iter().map(hermitian_coordinates).collect();
        let system = Self {
            dim_h,
            basis,
            coords,
        };
        let defect = system.orthonormality_defect();
        if defect > tol {
            return Err(Error::validation(
                "orthonormality",
                format!("Gram matrix deviates from identity by {defect:e}"),
            ));
        }
        let id = ComplexMatrix::identity(dim_h);
        if !system.contains(&id, tol)? {
            return Err(Error::validation(
                "unit",
                format!(
                    "identity lies at distance {:e} from the span",
                    system.residual(&id)?
                ),
            ));
        }
        Ok(system)
    }

    /// Random system of complex dimension `dim_s`: the identity plus `dim_s - 1`
    /// Gaussian Hermitian generators, deterministic per seed.
    pub fn random(dim_h: usize, dim_s: usize, seed: u64) -> Result<Self> {
        if dim_h == 0 || dim_s == 0 || dim_s > dim_h * dim_h {
            return Err(Error::Parameter(format!(
                "system dimension {dim_s} not in 1..={} for dim_h = {dim_h}",
                dim_h * dim_h
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let gens: Vec<ComplexMatrix> = (1..dim_s)
                .map(|_| random_hermitian(dim_h, &mut rng))
                .collect();
            let system = Self::from_generators(dim_h, &gens)?;
            if system.dim() == dim_s {
                return Ok(system);
            }
        }
    }

    /// `C I_n`.
    pub fn scalars(dim_h: usize) -> Result<Self> {
        Self::from_generators(dim_h, &[])
    }

    /// All of `M_n`.
    pub fn full(dim_h: usize) -> Result<Self> {
        let units: Vec<ComplexMatrix> = (0..dim_h)
            .flat_map(|i| (0..dim_h).map(move |j| ComplexMatrix::unit(dim_h, dim_h, i, j)))
            .collect();
        Self::from_generators(dim_h, &units)
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    /// `dim_C S`, equal to the real dimension of `S_sa`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// HS-orthonormal Hermitian basis of `S_sa`.
    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Distance from `M` to its HS projection onto the complex span.
    ///
    /// Decided through the Hermitian parts `M = H + iK` against the real span;
    /// `||M - P(M)||^2 = ||H - P(H)||^2 + ||K - P(K)||^2`.
    pub fn residual(&self, m: &ComplexMatrix) -> Result<f64> {
        self.check_shape(m)?;
        let sq = self.real_residual_sq(&hermitian_coordinates(&m.hermitian_part()))
            + self.real_residual_sq(&hermitian_coordinates(&m.skew_hermitian_part()));
        Ok(sq.sqrt())
    }

    /// Whether `||M - P_S(M)||_F <= tol * max(1, ||M||_F)`.
    pub fn contains(&self, m: &ComplexMatrix, tol: f64) -> Result<bool> {
        Ok(self.residual(m)? <= relative_tolerance(tol, m))
    }

    /// HS projection of `M` onto the complex span.
    pub fn project(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_shape(m)?;
        let mut out = ComplexMatrix::zeros(self.dim_h, self.dim_h);
        for e in &self.basis {
            let c = crate::numerics::hs_inner(e, m)?;
            out += &e.scale(c);
        }
        Ok(out)
    }

    /// Frobenius distance between the orthogonal projectors onto the two real spans,
    /// as `n^2 x n^2` matrices on Hermitian coordinate space.
    pub fn projector_distance(&self, other: &OperatorSystem) -> Result<f64> {
        if self.dim_h != other.dim_h {
            return Err(Error::dim(format!(
                "comparing systems on C^{} and C^{}",
                self.dim_h, other.dim_h
            )));
        }
        let p = self.projector();
        let q = other.projector();
        Ok(p.iter()
            .zip(&q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn equals(&self, other: &OperatorSystem, tol: f64) -> Result<bool> {
        Ok(self.projector_distance(other)? <= tol)
    }

    /// Largest entry of `|Gram - I|` over the stored basis.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, x) in self.coords.iter().enumerate() {
            for (j, y) in self.coords.iter().enumerate() {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expected).abs());
            }
        }
        worst
    }

    /// Re-checks the structural invariants at tolerance `tol` (relative where the
    /// quantity scales with the matrix).
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for (k, b) in self.basis.iter().enumerate() {
            if b.hermiticity_defect() > relative_tolerance(HERMITIAN_TOL.max(tol), b) {
                return Err(Error::validation(
                    "hermiticity",
                    format!("basis element {k}"),
                ));
            }
        }
        if self.orthonormality_defect() > tol {
            return Err(Error::validation(
                "orthonormality",
                format!("Gram defect {:e}", self.orthonormality_defect()),
            ));
        }
        let id = ComplexMatrix::identity(self.dim_h);
        if !self.contains(&id, tol.max(MEMBERSHIP_TOL))? {
            return Err(Error::validation("unit", "identity not in span"));
        }
        if self.dim() == 0 || self.dim() > self.dim_h * self.dim_h {
            return Err(Error::validation(
                "dimension",
                format!("d = {}", self.dim()),
            ));
        }
        Ok(())
    }

    fn projector(&self) -> Vec<f64> {
        let m = self.dim_h * self.dim_h;
        let mut p = vec![0.0; m * m];
        for x in &self.coords {
            for i in 0..m {
                if x[i] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    p[i * m + j] += x[i] * x[j];
                }
            }
        }
        p
    }

    fn real_residual_sq(&self, x: &[f64]) -> f64 {
        let mut r = x.to_vec();
        for _ in 0..2 {
            for e in &self.coords {
                let c: f64 = e.iter().zip(&r).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(e).for_each(|(v, w)| *v -= c * w);
            }
        }
        r.iter().map(|v| v * v).sum()
    }

    fn check_shape(&self, m: &ComplexMatrix) -> Result<()> {
        if m.shape() != (self.dim_h, self.dim_h) {
            return Err(Error::dim(format!(
                "{}x{} matrix against a system on C^{}",
                m.rows(),
                m.cols(),
                self.dim_h
            )));
        }
        Ok(())
    }
}
