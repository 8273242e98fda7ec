//! Operator (noncommutative confusability) graphs of channels and the round trip
//! operator system -> effects -> channel -> graph.

use serde::{Deserialize, Serialize};

use crate::channels::{synthesize_channel, ChannelCheck, QuantumChannel};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};
use crate::opsys::{
    duan_effect_basis, geometric_effect_sequence, EffectBasis, EffectCheck, EffectKind,
    OperatorSystem, MEMBERSHIP_TOL,
};

/// Tolerance for Kraus orthogonality of synthesized channels, relative to
/// `max(1, ||A_k||_F)`.
pub const KRAUS_ORTHOGONALITY_TOL: f64 = 1e-8;
/// Threshold on `|<phi|E|psi>|` in [`zero_error_distinguishable`].
pub const DISTINGUISHABILITY_TOL: f64 = 1e-9;

/// The graph `G(Phi)` together with the products it was spanned from.
#[derive(Clone, Debug)]
pub struct GraphExtraction {
    pub system: OperatorSystem,
    pub raw_products: Vec<ComplexMatrix>,
}

impl GraphExtraction {
    /// Checks the structure every channel graph must have: it contains `I`, the
    /// generating set is closed under adjoints and `d <= min(m^2, n^2)`.
    pub fn check_invariants(&self, kraus_count: usize) -> Result<()> {
        let n = self.system.dim_h();
        let id = ComplexMatrix::identity(n);
        if !self.system.contains(&id, MEMBERSHIP_TOL)? {
            return Err(Error::validation(
                "unit",
                "graph does not contain the identity",
            ));
        }
        for (k, p) in self.raw_products.iter().enumerate() {
            if !self.system.contains(&p.adjoint(), MEMBERSHIP_TOL)? {
                return Err(Error::validation(
                    "adjoint closure",
                    format!("adjoint of product {k} lies outside the graph"),
                ));
            }
        }
        let bound = (kraus_count * kraus_count).min(n * n);
        if self.system.dim() > bound {
            return Err(Error::validation(
                "dimension",
                format!("graph dimension {} exceeds {bound}", self.system.dim()),
            ));
        }
        Ok(())
    }
}

/// `G(Phi) = span{V_a^* V_b}` over all ordered pairs of Kraus operators.
pub fn operator_graph(channel: &QuantumChannel) -> Result<GraphExtraction> {
    let v = channel.kraus();
    let raw_products: Vec<ComplexMatrix> = v
        .iter()
        .flat_map(|a| v.iter().map(move |b| a.adjoint_dot(b)))
        .collect();
    let system = OperatorSystem::from_generators(channel.dim_in(), &raw_products)?;
    Ok(GraphExtraction {
        system,
        raw_products,
    })
}

/// `G(Phi)` as the image of the dual complementary channel, evaluated on the
/// matrix units of the environment algebra.
pub fn graph_via_dual_complementary(channel: &QuantumChannel) -> Result<GraphExtraction> {
    let m = channel.kraus_count();
    let raw_products = (0..m)
        .flat_map(|a| (0..m).map(move |b| (a, b)))
        .map(|(a, b)| channel.dual_complementary_apply(&ComplexMatrix::unit(m, m, a, b)))
        .collect::<Result<Vec<_>>>()?;
    let system = OperatorSystem::from_generators(channel.dim_in(), &raw_products)?;
    Ok(GraphExtraction {
        system,
        raw_products,
    })
}

/// Outcome of [`verify_round_trip`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RoundTripReport {
    pub kind: EffectKind,
    pub dim_h: usize,
    /// Dimension of the source system.
    pub dim_s: usize,
    pub effects: EffectCheck,
    /// Projector distance between `span{A_k}` and the source system.
    pub effect_span_distance: f64,
    pub effect_span_ok: bool,
    /// `max_{k,l} ||V_k^* V_l - delta_kl A_k||_F / max(1, ||A_k||_F)`.
    pub kraus_orthogonality_error: f64,
    pub kraus_orthogonality_ok: bool,
    pub channel: ChannelCheck,
    /// `dim_C G(Phi)`.
    pub graph_dim: usize,
    /// Real dimension of the Hermitian part of `G(Phi)`; equals `graph_dim`.
    pub graph_dim_hermitian: usize,
    /// Projector distance between `G(Phi)` and the source system.
    pub projector_distance: f64,
    pub graph_ok: bool,
    pub verdict: bool,
}

impl RoundTripReport {
    /// Multi-line human-readable summary.
    pub fn render(&self) -> String {
        let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
        let mut s = String::new();
        s.push_str(&format!(
            "round trip ({}) on C^{}: source dimension d = {}\n",
            self.kind, self.dim_h, self.dim_s
        ));
        s.push_str(&format!(
            "  effects: {} operators, spectra in [{:.3e}, {:.6}] {}, ||sum A_k - I||_F = {:.3e} {}\n",
            self.effects.count,
            self.effects.min_eigenvalue,
            self.effects.max_eigenvalue,
            flag(self.effects.spectrum_ok),
            self.effects.sum_error,
            flag(self.effects.sum_ok),
        ));
        if self.kind == EffectKind::Geometric {
            s.push_str(&format!(
                "  geometric bounds: max ||A_k|| 2^(k-1) = {:.6}, ||I - A_1|| = {:.6} {}\n",
                self.effects.geometric.max_scaled_norm,
                self.effects.geometric.identity_defect,
                flag(self.effects.geometric.holds()),
            ));
        }
        s.push_str(&format!(
            "  effect span distance {:.3e} {}\n",
            self.effect_span_distance,
            flag(self.effect_span_ok)
        ));
        s.push_str(&format!(
            "  kraus orthogonality error {:.3e} {}\n",
            self.kraus_orthogonality_error,
            flag(self.kraus_orthogonality_ok)
        ));
        s.push_str(&format!(
            "  channel: tp error {:.3e} {}, choi min eigenvalue {:.3e} {}, choi marginal error {:.3e} {}\n",
            self.channel.tp_error,
            flag(self.channel.tp_ok),
            self.channel.choi_min_eigenvalue,
            flag(self.channel.cp_ok),
            self.channel.choi_marginal_error,
            flag(self.channel.choi_marginal_ok),
        ));
        s.push_str(&format!(
            "  graph: dim {} (hermitian part {}), projector distance {:.3e} {}\n",
            self.graph_dim,
            self.graph_dim_hermitian,
            self.projector_distance,
            flag(self.graph_ok)
        ));
        s.push_str(&format!(
            "verdict: {}\n",
            if self.verdict { "PASS" } else { "FAIL" }
        ));
        s
    }
}

/// Builds the effect basis of the requested kind.
pub fn effect_basis(system: &OperatorSystem, kind: EffectKind) -> Result<EffectBasis> {
    match kind {
        EffectKind::Duan => duan_effect_basis(system),
        EffectKind::Geometric => geometric_effect_sequence(system),
    }
}

/// Runs effects -> channel -> graph on `system` and checks every stage.
pub fn verify_round_trip(system: &OperatorSystem, kind: EffectKind) -> Result<RoundTripReport> {
    let effects = effect_basis(system, kind).map_err(|e| e.at_stage("effect basis"))?;
    let effect_check = effects.check().map_err(|e| e.at_stage("effect basis"))?;
    let effect_span_distance = effects
        .span()
        .and_then(|span| span.projector_distance(system))
        .map_err(|e| e.at_stage("effect span"))?;

    let channel = synthesize_channel(&effects).map_err(|e| e.at_stage("channel synthesis"))?;
    let kraus_orthogonality_error = kraus_orthogonality_error(&channel, &effects);
    let channel_check = channel.check().map_err(|e| e.at_stage("channel check"))?;

    let graph = operator_graph(&channel).map_err(|e| e.at_stage("graph extraction"))?;
    let projector_distance = graph
        .system
        .projector_distance(system)
        .map_err(|e| e.at_stage("graph comparison"))?;

    let effect_span_ok = effect_span_distance <= MEMBERSHIP_TOL;
    let kraus_orthogonality_ok = kraus_orthogonality_error <= KRAUS_ORTHOGONALITY_TOL;
    let graph_ok = projector_distance <= MEMBERSHIP_TOL;
    let verdict = effect_check.passes(kind)
        && effect_span_ok
        && kraus_orthogonality_ok
        && channel_check.passes()
        && graph_ok;
    Ok(RoundTripReport {
        kind,
        dim_h: system.dim_h(),
        dim_s: system.dim(),
        effects: effect_check,
        effect_span_distance,
        effect_span_ok,
        kraus_orthogonality_error,
        kraus_orthogonality_ok,
        channel: channel_check,
        graph_dim: graph.system.dim(),
        graph_dim_hermitian: graph.system.basis().len(),
        projector_distance,
        graph_ok,
        verdict,
    })
}

/// `max_{k,l} ||V_k^* V_l - delta_kl A_k||_F / max(1, ||A_k||_F)`.
pub fn kraus_orthogonality_error(channel: &QuantumChannel, effects: &EffectBasis) -> f64 {
    let v = channel.kraus();
    let a = effects.effects();
    let mut worst: f64 = 0.0;
    for k in 0..v.len() {
        let scale = a[k].frobenius_norm().max(1.0);
        for l in 0..v.len() {
            let prod = v[k].adjoint_dot(&v[l]);
            let err = if k == l {
                (&prod - &a[k]).frobenius_norm()
            } else {
                prod.frobenius_norm()
            };
            worst = worst.max(err / scale);
        }
    }
    worst
}

/// Whether pure inputs `phi`, `psi` stay perfectly distinguishable through any
/// channel with graph `graph`: `<phi|E|psi> = 0` for every `E` in the graph.
pub fn zero_error_distinguishable(
    phi: &ComplexMatrix,
    psi: &ComplexMatrix,
    graph: &OperatorSystem,
) -> Result<bool> {
    let n = graph.dim_h();
    for (name, v) in [("phi", phi), ("psi", psi)] {
        if v.shape() != (n, 1) {
            return Err(Error::dim(format!(
                "{name} is {}x{}, expected a column vector of length {n}",
                v.rows(),
                v.cols()
            )));
        }
        let norm = v.frobenius_norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "{name} has norm {norm}, expected a unit vector"
            )));
        }
    }
    Ok(graph.basis().iter().all(|e| {
        let amp: C64 = phi.adjoint_dot(&e.dot(psi))[(0, 0)];
        amp.norm() <= DISTINGUISHABILITY_TOL
    }))
}
