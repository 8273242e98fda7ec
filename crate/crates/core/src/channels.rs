//! Quantum channels in Kraus form.
//!
//! A channel is stored as its Kraus stack `V_1, ..., V_m : C^n -> C^{dim_out}`; the
//! Stinespring isometry `V |phi> = sum_k V_k |phi> (x) |k>` is never materialized.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    block_spectrum, embed_block, orthonormal_columns, partial_trace, psd_sqrt, random_gaussian,
    relative_tolerance, ComplexMatrix, TracedFactor, C64, PSD_TOL,
};
use crate::opsys::EffectBasis;

/// Relative trace-preservation tolerance at construction, scaled by `n`.
pub const TP_TOL: f64 = 1e-9;
/// Looser tolerance for channels read from files.
pub const TP_LOAD_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    /// Builds a channel, requiring `||sum V_k^* V_k - I||_F <= 1e-9 n`.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tp_tolerance(dim_in, dim_out, kraus, TP_TOL)
    }

    pub fn with_tp_tolerance(
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<ComplexMatrix>,
        tol: f64,
    ) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::dim(format!("channel C^{dim_in} -> C^{dim_out}")));
        }
        if kraus.is_empty() {
            return Err(Error::validation("kraus count", "no Kraus operators"));
        }
        for (k, v) in kraus.iter().enumerate() {
            if v.shape() != (dim_out, dim_in) {
                return Err(Error::dim(format!(
                    "Kraus operator {k} has shape {}x{}, expected {dim_out}x{dim_in}",
                    v.rows(),
                    v.cols()
                )));
            }
            if v.is_zero() {
                return Err(Error::validation(
                    "nonzero kraus",
                    format!("Kraus operator {k} is zero"),
                ));
            }
        }
        let channel = Self {
            dim_in,
            dim_out,
            kraus,
        };
        let err = channel.tp_error();
        if err > tol * dim_in as f64 {
            return Err(Error::validation(
                "trace preservation",
                format!(
                    "||sum V_k^* V_k - I||_F = {err:e} exceeds {:e}",
                    tol * dim_in as f64
                ),
            ));
        }
        Ok(channel)
    }

    /// The noiseless channel with the single Kraus operator `I_n`.
    pub fn identity(n: usize) -> Self {
        Self {
            dim_in: n,
            dim_out: n,
            kraus: vec![ComplexMatrix::identity(n)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Number of Kraus operators, the environment dimension of the induced dilation.
    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    /// `sum_k V_k^* V_k`.
    pub fn kraus_gram_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for v in &self.kraus {
            s += &v.adjoint_dot(v);
        }
        s
    }

    /// `||sum_k V_k^* V_k - I||_F`.
    pub fn tp_error(&self) -> f64 {
        (&self.kraus_gram_sum() - &ComplexMatrix::identity(self.dim_in)).frobenius_norm()
    }

    /// `rho -> sum_k V_k rho V_k^*`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape(rho, self.dim_in, "input state")?;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for v in &self.kraus {
            out += &v.dot(rho).dot(&v.adjoint());
        }
        Ok(out)
    }

    /// Heisenberg-picture map `B -> sum_k V_k^* B V_k`, unital when the channel is
    /// trace preserving.
    pub fn dual_apply(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        expect_shape(b, self.dim_out, "output observable")?;
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for v in &self.kraus {
            out += &v.adjoint_dot(&b.dot(v));
        }
        Ok(out)
    }

    /// Complementary channel into the environment `C^m`.
    ///
    /// Its Kraus operators are `W_j = (<j| (x) I_E) V`: the `m x n` matrix whose row
    /// `k` is row `j` of `V_k`. Zero `W_j` are dropped. Then
    /// `[W(rho)]_{ab} = Tr(V_a rho V_b^*)`.
    pub fn complementary(&self) -> QuantumChannel {
        let m = self.kraus.len();
        let kraus = (0..self.dim_out)
            .map(|j| ComplexMatrix::from_fn(m, self.dim_in, |k, i| self.kraus[k][(j, i)]))
            .filter(|w| !w.is_zero())
            .collect();
        QuantumChannel {
            dim_in: self.dim_in,
            dim_out: m,
            kraus,
        }
    }

    /// Dual of the complementary channel, `B -> V^* (I_K (x) B) V`, evaluated from
    /// the Kraus stack as `sum_{a,b} B_{ab} V_a^* V_b`.
    pub fn dual_complementary_apply(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let m = self.kraus.len();
        expect_shape(b, m, "environment observable")?;
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for a in 0..m {
            for c in 0..m {
                let w = b[(a, c)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                out += &self.kraus[a].adjoint_dot(&self.kraus[c]).scale(w);
            }
        }
        Ok(out)
    }

    /// Choi matrix `sum_{ij} |i><j| (x) Phi(|i><j|)` with the unnormalized maximally
    /// entangled vector, of size `n dim_out`.
    ///
    /// Entry `((i, a), (j, b))` is `sum_k V_k[a, i] conj(V_k[b, j])`; it is assembled
    /// from the nonzero entries of each `vec(V_k)`.
    pub fn choi(&self) -> ComplexMatrix {
        let (n, d) = (self.dim_in, self.dim_out);
        let size = n * d;
        let mut out = ComplexMatrix::zeros(size, size);
        for v in &self.kraus {
            let support: Vec<(usize, C64)> = (0..n)
                .flat_map(|i| (0..d).map(move |a| (i, a)))
                .filter_map(|(i, a)| {
                    let z = v[(a, i)];
                    (z != C64::new(0.0, 0.0)).then_some((i * d + a, z))
                })
                .collect();
            for &(r, x) in &support {
                for &(c, y) in &support {
                    out[(r, c)] += x * y.conj();
                }
            }
        }
        out
    }

    /// Complete positivity and trace preservation, measured on the Choi matrix.
    pub fn check(&self) -> Result<ChannelCheck> {
        let n = self.dim_in as f64;
        let tp_error = self.tp_error();
        let choi = self.choi();
        let spectrum = block_spectrum(&choi)?;
        let choi_min_eigenvalue = spectrum[0];
        let choi_tol = relative_tolerance(PSD_TOL, &choi);
        let marginal = partial_trace(&choi, self.dim_in, self.dim_out, TracedFactor::Second)?;
        let choi_marginal_error =
            (&marginal - &ComplexMatrix::identity(self.dim_in)).frobenius_norm();
        Ok(ChannelCheck {
            tp_error,
            tp_ok: tp_error <= TP_TOL * n,
            choi_min_eigenvalue,
            cp_ok: choi_min_eigenvalue >= -choi_tol,
            choi_marginal_error,
            choi_marginal_ok: choi_marginal_error <= TP_TOL * n,
        })
    }
}

/// Measured CP/TP invariants of a channel.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChannelCheck {
    /// `||sum V_k^* V_k - I||_F`.
    pub tp_error: f64,
    pub tp_ok: bool,
    pub choi_min_eigenvalue: f64,
    /// `lambda_min(choi) >= -1e-10 max(1, ||choi||_F)`.
    pub cp_ok: bool,
    /// `||Tr_out(choi) - I||_F`.
    pub choi_marginal_error: f64,
    pub choi_marginal_ok: bool,
}

impl ChannelCheck {
    pub fn passes(&self) -> bool {
        self.tp_ok && self.cp_ok && self.choi_marginal_ok
    }
}

/// Channel whose `k`-th Kraus operator is `i_k A_k^{1/2}`, with `i_k` the embedding
/// of `C^n` as the `k`-th block of `K = (C^n)^{+d}`.
///
/// Disjoint blocks give `V_k^* V_l = delta_kl A_k`.
pub fn synthesize_channel(effects: &EffectBasis) -> Result<QuantumChannel> {
    let check = effects.check()?;
    if !check.passes(effects.kind()) {
        return Err(Error::validation(
            "effect basis",
            format!("rejected input: {check:?}"),
        ));
    }
    let n = effects.dim_h();
    let d = effects.len();
    let kraus = effects
        .effects()
        .iter()
        .enumerate()
        .map(|(k, a)| Ok(embed_block(d * n, n, k * n, 0, &psd_sqrt(a)?)))
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(n, d * n, kraus)
}

/// Random channel from a Haar-like isometry: a seeded complex Gaussian
/// `(kraus_count dim_out) x dim_in` matrix with orthonormalized columns, cut into
/// `kraus_count` row blocks.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    seed: u64,
) -> Result<QuantumChannel> {
    if dim_in == 0 || dim_out == 0 || kraus_count == 0 {
        return Err(Error::Parameter(format!(
            "dimensions must be positive (dim_in {dim_in}, dim_out {dim_out}, kraus {kraus_count})"
        )));
    }
    if kraus_count * dim_out < dim_in {
        return Err(Error::Parameter(format!(
            "an isometry C^{dim_in} -> C^{} does not exist",
            kraus_count * dim_out
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iso = loop {
        let g = random_gaussian(kraus_count * dim_out, dim_in, &mut rng);
        if let Some(q) = orthonormal_columns(&g) {
            break q;
        }
    };
    let kraus = (0..kraus_count)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |a, i| iso[(k * dim_out + a, i)]))
        .collect();
    QuantumChannel::new(dim_in, dim_out, kraus)
}

fn expect_shape(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::dim(format!(
            "{what} is {}x{}, expected {n}x{n}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eigenvalues_hermitian, random_state, sigma_z};
    use crate::opsys::{duan_effect_basis, geometric_effect_sequence, OperatorSystem};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn rejects_malformed_kraus_families() {
        assert!(QuantumChannel::new(2, 2, vec![]).is_err());
        assert!(matches!(
            QuantumChannel::new(2, 2, vec![ComplexMatrix::identity(3)]),
            Err(Error::Dimension(_))
        ));
        let err = QuantumChannel::new(
            2,
            2,
            vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)],
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::Validation { ref invariant, .. } if invariant == "nonzero kraus")
        );
        let err = QuantumChannel::new(2, 2, vec![ComplexMatrix::from_diag(&[1.0, 0.9f64.sqrt()])])
            .unwrap_err();
        assert!(
            matches!(err, Error::Validation { ref invariant, .. } if invariant == "trace preservation")
        );
    }

    #[test]
    fn synthesize_single_effect_is_identity() {
        let e = duan_effect_basis(&OperatorSystem::scalars(3).unwrap()).unwrap();
        let ch = synthesize_channel(&e).unwrap();
        assert_eq!(ch.kraus_count(), 1);
        assert_eq!(ch.kraus()[0], ComplexMatrix::identity(3));
    }

    #[test]
    fn synthesize_duan_z_system_block_products() {
        let s = OperatorSystem::from_generators(2, &[sigma_z()]).unwrap();
        let e = duan_effect_basis(&s).unwrap();
        let ch = synthesize_channel(&e).unwrap();
        assert_eq!((ch.dim_in(), ch.dim_out()), (2, 4));
        let v = ch.kraus();
        assert!(close(
            &v[0].adjoint_dot(&v[0]),
            &ComplexMatrix::from_diag(&[0.5, 5.0 / 6.0]),
            1e-12
        ));
        assert!(close(
            &v[1].adjoint_dot(&v[1]),
            &ComplexMatrix::from_diag(&[0.5, 1.0 / 6.0]),
            1e-12
        ));
        assert!(v[0].adjoint_dot(&v[1]).is_zero());
    }

    #[test]
    fn synthesize_random_basis_is_tp() {
        let s = OperatorSystem::random(3, 5, 17).unwrap();
        for e in [
            duan_effect_basis(&s).unwrap(),
            geometric_effect_sequence(&s).unwrap(),
        ] {
            let ch = synthesize_channel(&e).unwrap();
            assert_eq!(ch.kraus_count(), 5);
            assert!(ch.tp_error() <= 1e-9 * 3.0);
        }
    }

    #[test]
    fn apply_identity_and_invariants() {
        let mut r = rng(1);
        let rho = random_state(3, &mut r);
        assert_eq!(QuantumChannel::identity(3).apply(&rho).unwrap(), rho);
        let ch = random_channel(3, 2, 3, 4).unwrap();
        for _ in 0..10 {
            let rho = random_state(3, &mut r);
            let out = ch.apply(&rho).unwrap();
            assert!((out.trace() - rho.trace()).norm() <= 1e-9);
            assert!(out.is_hermitian(1e-12));
            assert!(eigenvalues_hermitian(&out).unwrap()[0] >= -1e-10);
        }
        assert!(matches!(
            ch.apply(&ComplexMatrix::identity(2)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn dual_is_unital_and_paired() {
        let mut r = rng(2);
        let ch = random_channel(2, 3, 2, 9).unwrap();
        assert!(close(
            &ch.dual_apply(&ComplexMatrix::identity(3)).unwrap(),
            &ComplexMatrix::identity(2),
            1e-12
        ));
        for _ in 0..10 {
            let rho = random_state(2, &mut r);
            let b = random_gaussian(3, 3, &mut r);
            let lhs = rho.dot(&ch.dual_apply(&b).unwrap()).trace();
            let rhs = ch.apply(&rho).unwrap().dot(&b).trace();
            assert!((lhs - rhs).norm() <= 1e-9);
        }
        let b = random_gaussian(4, 4, &mut r);
        assert_eq!(QuantumChannel::identity(4).dual_apply(&b).unwrap(), b);
    }

    #[test]
    fn complementary_of_identity_is_trace() {
        let mut r = rng(3);
        let comp = QuantumChannel::identity(3).complementary();
        assert_eq!(comp.dim_out(), 1);
        let rho = random_gaussian(3, 3, &mut r);
        let out = comp.apply(&rho).unwrap();
        assert!((out[(0, 0)] - rho.trace()).norm() < 1e-12);
    }

    #[test]
    fn complementary_entries_are_kraus_traces() {
        let mut r = rng(4);
        let s = OperatorSystem::random(2, 3, 5).unwrap();
        let ch = synthesize_channel(&duan_effect_basis(&s).unwrap()).unwrap();
        let comp = ch.complementary();
        assert!(comp.tp_error() < 1e-9);
        let rho = random_state(2, &mut r);
        let out = comp.apply(&rho).unwrap();
        let v = ch.kraus();
        for a in 0..v.len() {
            for b in 0..v.len() {
                let oracle = v[a].dot(&rho).dot(&v[b].adjoint()).trace();
                assert!((out[(a, b)] - oracle).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dual_complementary_matches_both_formulas() {
        let mut r = rng(5);
        let ch = random_channel(3, 2, 3, 1).unwrap();
        let m = ch.kraus_count();
        assert!(close(
            &ch.dual_complementary_apply(&ComplexMatrix::identity(m))
                .unwrap(),
            &ComplexMatrix::identity(3),
            1e-12
        ));
        // B = |a><b| picks out V_a^* V_b.
        for a in 0..m {
            for b in 0..m {
                let out = ch
                    .dual_complementary_apply(&ComplexMatrix::unit(m, m, a, b))
                    .unwrap();
                assert!(close(
                    &out,
                    &ch.kraus()[a].adjoint_dot(&ch.kraus()[b]),
                    1e-14
                ));
            }
        }
        let comp = ch.complementary();
        for _ in 0..10 {
            let b = random_gaussian(m, m, &mut r);
            let direct = ch.dual_complementary_apply(&b).unwrap();
            let via = comp.dual_apply(&b).unwrap();
            assert!(close(&direct, &via, 1e-9));
        }
        assert!(matches!(
            ch.dual_complementary_apply(&ComplexMatrix::identity(2)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn choi_of_identity_channel() {
        let c = QuantumChannel::identity(2).choi();
        let ev = eigenvalues_hermitian(&c).unwrap();
        assert!(ev[..3].iter().all(|l| l.abs() < 1e-14));
        assert!((ev[3] - 2.0).abs() < 1e-14);
        // |Omega> = |00> + |11>
        assert_eq!(c[(0, 3)], C64::new(1.0, 0.0));
    }

    #[test]
    fn choi_matches_definition_and_checks_pass() {
        let ch = random_channel(2, 3, 2, 21).unwrap();
        let (n, d) = (2, 3);
        let mut oracle = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                let block = ch.apply(&ComplexMatrix::unit(n, n, i, j)).unwrap();
                oracle += &crate::numerics::tensor(&ComplexMatrix::unit(n, n, i, j), &block);
            }
        }
        assert!(close(&ch.choi(), &oracle, 1e-13));
        let check = ch.check().unwrap();
        assert!(check.passes(), "{check:?}");
        let s = OperatorSystem::random(3, 6, 2).unwrap();
        let synth = synthesize_channel(&geometric_effect_sequence(&s).unwrap()).unwrap();
        assert!(synth.check().unwrap().passes());
    }

    #[test]
    fn random_channel_contract() {
        let u = random_channel(2, 2, 1, 77).unwrap();
        let v = &u.kraus()[0];
        assert!(close(
            &v.dot(&v.adjoint()),
            &ComplexMatrix::identity(2),
            1e-12
        ));
        let ch = random_channel(3, 4, 2, 7).unwrap();
        assert!(ch.tp_error() <= 1e-9 * 3.0);
        assert_eq!(random_channel(3, 4, 2, 7).unwrap(), ch);
        assert!(matches!(
            random_channel(5, 2, 2, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            random_channel(2, 2, 0, 0),
            Err(Error::Parameter(_))
        ));
    }
}
