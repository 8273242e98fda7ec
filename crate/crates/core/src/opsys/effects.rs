//! Effect bases: finite families `0 <= A_k <= I` summing to `I` that span a given
//! operator system.

use serde::{Deserialize, Serialize};

use super::{OperatorSystem, RANK_TOL};
use crate::error::{Error, Result};
use crate::numerics::{
    eigenvalues_hermitian, from_hermitian_coordinates, hermitian_coordinates,
    operator_norm_hermitian, orthonormalize_real, relative_tolerance, ComplexMatrix, PSD_TOL,
};

/// Which construction produced an [`EffectBasis`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    /// Rescaled shifts `beta (I + B_k / 2)` with the remainder as first effect.
    Duan,
    /// Geometrically damped points of the ball `||B - I|| <= 1/2`.
    Geometric,
}

impl std::fmt::Display for EffectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EffectKind::Duan => "duan",
            EffectKind::Geometric => "geometric",
        })
    }
}

impl std::str::FromStr for EffectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "duan" => Ok(EffectKind::Duan),
            "geometric" => Ok(EffectKind::Geometric),
            other => Err(Error::Parameter(format!(
                "unknown effect construction {other:?} (expected duan or geometric)"
            ))),
        }
    }
}

/// Tolerances for validating an effect basis.
#[derive(Clone, Copy, Debug)]
pub struct EffectTolerance {
    /// Spectra must lie in `[-t c, 1 + t c]`, `c = max(1, ||A_k||_F)`.
    pub spectrum: f64,
    /// `||sum A_k - I||_F <= t n`.
    pub sum: f64,
}

impl EffectTolerance {
    pub const STRICT: EffectTolerance = EffectTolerance {
        spectrum: PSD_TOL,
        sum: 1e-9,
    };
    pub const LOAD: EffectTolerance = EffectTolerance {
        spectrum: 1e-6,
        sum: 1e-6,
    };
}

/// Norm bounds of the geometric construction.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GeometricBounds {
    /// `max_{k >= 2} ||A_k|| 2^{k-1}`; strictly below 1 when the bound holds.
    pub max_scaled_norm: f64,
    /// `||I - A_1||`; strictly below 1 when the bound holds.
    pub identity_defect: f64,
}

impl GeometricBounds {
    pub fn holds(&self) -> bool {
        self.max_scaled_norm < 1.0 && self.identity_defect < 1.0
    }
}

/// Measured invariants of an effect basis.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EffectCheck {
    pub count: usize,
    /// Smallest eigenvalue over all effects.
    pub min_eigenvalue: f64,
    /// Largest eigenvalue over all effects.
    pub max_eigenvalue: f64,
    /// Whether every spectrum lies in its tolerance window.
    pub spectrum_ok: bool,
    /// `||sum A_k - I||_F`.
    pub sum_error: f64,
    pub sum_ok: bool,
    pub geometric: GeometricBounds,
}

impl EffectCheck {
    pub fn passes(&self, kind: EffectKind) -> bool {
        self.spectrum_ok && self.sum_ok && (kind != EffectKind::Geometric || self.geometric.holds())
    }
}

#[derive(Clone, Debug)]
pub struct EffectBasis {
    dim_h: usize,
    kind: EffectKind,
    effects: Vec<ComplexMatrix>,
}

impl EffectBasis {
    /// Validates at construction tolerance.
    pub fn new(kind: EffectKind, effects: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(kind, effects, EffectTolerance::STRICT)
    }

    pub fn with_tolerance(
        kind: EffectKind,
        effects: Vec<ComplexMatrix>,
        tol: EffectTolerance,
    ) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::validation("count", "effect basis is empty"));
        };
        let dim_h = first.rows();
        if let Some((k, e)) = effects
            .iter()
            .enumerate()
            .find(|(_, e)| e.shape() != (dim_h, dim_h))
        {
            return Err(Error::dim(format!(
                "effect {k} has shape {}x{}, expected {dim_h}x{dim_h}",
                e.rows(),
                e.cols()
            )));
        }
        let basis = Self {
            dim_h,
            kind,
            effects,
        };
        let check = basis.check_with(tol)?;
        if !check.spectrum_ok {
            return Err(Error::validation(
                "effect bounds 0 <= A_k <= I",
                format!(
                    "spectra span [{:e}, {}]",
                    check.min_eigenvalue, check.max_eigenvalue
                ),
            ));
        }
        if !check.sum_ok {
            return Err(Error::validation(
                "resolution of identity",
                format!("||sum A_k - I||_F = {:e}", check.sum_error),
            ));
        }
        if kind == EffectKind::Geometric && !check.geometric.holds() {
            return Err(Error::validation(
                "geometric norm bounds",
                format!("{:?}", check.geometric),
            ));
        }
        Ok(basis)
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn kind(&self) -> EffectKind {
        self.kind
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn check(&self) -> Result<EffectCheck> {
        self.check_with(EffectTolerance::STRICT)
    }

    pub fn check_with(&self, tol: EffectTolerance) -> Result<EffectCheck> {
        let n = self.dim_h;
        let mut min_eigenvalue = f64::INFINITY;
        let mut max_eigenvalue = f64::NEG_INFINITY;
        let mut spectrum_ok = true;
        let mut sum = ComplexMatrix::zeros(n, n);
        let mut max_scaled_norm: f64 = 0.0;
        for (k, a) in self.effects.iter().enumerate() {
            let ev = eigenvalues_hermitian(a)?;
            let (lo, hi) = (ev[0], ev[n - 1]);
            let slack = relative_tolerance(tol.spectrum, a);
            spectrum_ok &= lo >= -slack && hi <= 1.0 + slack;
            min_eigenvalue = min_eigenvalue.min(lo);
            max_eigenvalue = max_eigenvalue.max(hi);
            if k >= 1 {
                let norm = lo.abs().max(hi.abs());
                max_scaled_norm = max_scaled_norm.max(norm * 2f64.powi(k as i32));
            }
            sum += a;
        }
        let id = ComplexMatrix::identity(n);
        let sum_error = (&sum - &id).frobenius_norm();
        let identity_defect = operator_norm_hermitian(&(&id - &self.effects[0]))?;
        Ok(EffectCheck {
            count: self.effects.len(),
            min_eigenvalue,
            max_eigenvalue,
            spectrum_ok,
            sum_error,
            sum_ok: sum_error <= tol.sum * n as f64,
            geometric: GeometricBounds {
                max_scaled_norm,
                identity_defect,
            },
        })
    }

    /// The operator system spanned by the effects.
    pub fn span(&self) -> Result<OperatorSystem> {
        OperatorSystem::from_generators(self.dim_h, &self.effects)
    }
}

/// Hermitian basis `B_2, ..., B_d` of the traceless-relative-to-identity part of
/// `S_sa`: the identity direction is placed first and the rest re-orthonormalized
/// against it.
fn non_identity_directions(system: &OperatorSystem) -> Result<Vec<ComplexMatrix>> {
    let n = system.dim_h();
    let unit =
        hermitian_coordinates(&ComplexMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt()));
    let mut coords = vec![unit];
    coords.extend(system.coords.iter().cloned());
    let rotated = orthonormalize_real(&coords, RANK_TOL);
    if rotated.len() != system.dim() {
        return Err(Error::Domain(format!(
            "identity is not in the span: rotated basis has {} elements for d = {}",
            rotated.len(),
            system.dim()
        )));
    }
    Ok(rotated[1..]
        .iter()
        .map(|x| from_hermitian_coordinates(n, x))
        .collect())
}

/// `B / ||B||` in operator norm.
fn unit_operator_norm(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let norm = operator_norm_hermitian(b)?;
    Ok(b.scale_real(1.0 / norm))
}

/// Effect basis with `F_k = I + B_k / 2` (`||B_k|| = 1`), `A_k = beta F_k` for
/// `k >= 2` and `A_1 = I - sum A_k`, where `beta = 1 / (2 lambda_max(sum F_k))`.
///
/// Then `F_k >= I/2` and `A_1 >= I/2`, so every effect is strictly inside `[0, I]`
/// up to the endpoints of `A_1`.
pub fn duan_effect_basis(system: &OperatorSystem) -> Result<EffectBasis> {
    let n = system.dim_h();
    let id = ComplexMatrix::identity(n);
    let directions = non_identity_directions(system)?;
    if directions.is_empty() {
        return EffectBasis::new(EffectKind::Duan, vec![id]);
    }
    let shifted: Vec<ComplexMatrix> = directions
        .iter()
        .map(|b| unit_operator_norm(b).map(|u| &id + &u.scale_real(0.5)))
        .collect::<Result<_>>()?;
    let mut total = ComplexMatrix::zeros(n, n);
    for f in &shifted {
        total += f;
    }
    let top = *eigenvalues_hermitian(&total)?.last().unwrap();
    let beta = 1.0 / (2.0 * top);
    let rest: Vec<ComplexMatrix> = shifted.iter().map(|f| f.scale_real(beta)).collect();
    EffectBasis::new(EffectKind::Duan, with_remainder_first(&id, rest))
}

/// Truncated geometric sequence: `A_k = (I + B_k / (2 ||B_k||)) / 2^k` for
/// `k = 2..d` and `A_1 = I - sum A_k`.
///
/// Each `I + B_k / (2 ||B_k||)` lies in the ball `||X - I|| <= 1/2` inside `S_sa`, so
/// `||A_k|| <= (3/2) 2^{-k} < 2^{-(k-1)}` and `||I - A_1|| < 3/4`.
pub fn geometric_effect_sequence(system: &OperatorSystem) -> Result<EffectBasis> {
    let n = system.dim_h();
    let id = ComplexMatrix::identity(n);
    let directions = non_identity_directions(system)?;
    let rest: Vec<ComplexMatrix> = directions
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let k = i as i32 + 2;
            let centered = &id + &unit_operator_norm(b)?.scale_real(0.5);
            Ok(centered.scale_real(2f64.powi(-k)))
        })
        .collect::<Result<_>>()?;
    EffectBasis::new(EffectKind::Geometric, with_remainder_first(&id, rest))
}

fn with_remainder_first(id: &ComplexMatrix, rest: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    let mut first = id.clone();
    for a in &rest {
        first -= a;
    }
    let mut effects = Vec::with_capacity(rest.len() + 1);
    effects.push(first.hermitian_part());
    effects.extend(rest);
    effects
}
