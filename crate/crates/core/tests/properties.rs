//! Randomized invariants across the public API.

use opgraph::channels::{random_channel, synthesize_channel, QuantumChannel};
use opgraph::graphs::{
    effect_basis, graph_via_dual_complementary, kraus_orthogonality_error, operator_graph,
    zero_error_distinguishable,
};
use opgraph::io::{emit, parse, Document};
use opgraph::numerics::{
    eig_hermitian, hs_inner, orthonormalize_hs, partial_trace, psd_sqrt, random_gaussian,
    random_hermitian, random_state, tensor, ComplexMatrix, TracedFactor, C64,
};
use opgraph::opsys::{EffectKind, OperatorSystem};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).frobenius_norm()
}

fn unit_vector(n: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = random_gaussian(n, 1, r);
    g.scale_real(1.0 / g.frobenius_norm())
}

fn kind_strategy() -> impl Strategy<Value = EffectKind> {
    prop_oneof![Just(EffectKind::Duan), Just(EffectKind::Geometric)]
}

/// `(dim_h, dim_s, seed)` with `1 <= dim_s <= dim_h^2`.
fn system_params() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=5).prop_flat_map(|n| (Just(n), 1..=n * n, any::<u64>()))
}

/// `(dim_in, dim_out, kraus, seed)` with `kraus * dim_out >= dim_in`.
fn channel_params() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..=4, 1usize..=4, 1usize..=4, any::<u64>())
        .prop_filter("isometry needs room", |(n, m, k, _)| m * k >= *n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigendecomposition_reconstructs(n in 1usize..=12, seed in any::<u64>()) {
        let a = random_hermitian(n, &mut rng(seed));
        let e = eig_hermitian(&a).unwrap();
        let scale = a.frobenius_norm().max(1.0);
        prop_assert!(dist(&e.reconstruct(), &a) <= 1e-12 * scale);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = &e.eigenvectors;
        prop_assert!(dist(&v.adjoint_dot(v), &ComplexMatrix::identity(n)) <= 1e-12 * n as f64);
        let trace: f64 = e.eigenvalues.iter().sum();
        prop_assert!((trace - a.trace().re).abs() <= 1e-12 * scale * n as f64);
    }

    #[test]
    fn psd_sqrt_squares_back(n in 1usize..=8, seed in any::<u64>()) {
        let g = random_gaussian(n, n, &mut rng(seed));
        let p = g.adjoint_dot(&g);
        let r = psd_sqrt(&p).unwrap();
        prop_assert!(r.hermiticity_defect() <= 1e-12 * r.frobenius_norm().max(1.0));
        prop_assert!(eig_hermitian(&r).unwrap().min() >= -1e-10);
        prop_assert!(dist(&r.dot(&r), &p) <= 1e-10 * p.frobenius_norm().max(1.0));
    }

    #[test]
    fn partial_trace_is_linear_and_undoes_tensor(
        a in 1usize..=3, b in 1usize..=3, seed in any::<u64>(), s in -3.0f64..3.0,
    ) {
        let mut r = rng(seed);
        let x = random_gaussian(a * b, a * b, &mut r);
        let y = random_gaussian(a * b, a * b, &mut r);
        let c = C64::new(s, 1.0 - s);
        for traced in [TracedFactor::First, TracedFactor::Second] {
            let lhs = partial_trace(&(&x + &y.scale(c)), a, b, traced).unwrap();
            let rhs = &partial_trace(&x, a, b, traced).unwrap()
                + &partial_trace(&y, a, b, traced).unwrap().scale(c);
            prop_assert!(dist(&lhs, &rhs) <= 1e-12 * lhs.frobenius_norm().max(1.0));
        }
        let p = random_gaussian(a, a, &mut r);
        let q = random_gaussian(b, b, &mut r);
        let pq = tensor(&p, &q);
        let first = partial_trace(&pq, a, b, TracedFactor::First).unwrap();
        let second = partial_trace(&pq, a, b, TracedFactor::Second).unwrap();
        prop_assert!(dist(&first, &q.scale(p.trace())) <= 1e-12 * pq.frobenius_norm().max(1.0));
        prop_assert!(dist(&second, &p.scale(q.trace())) <= 1e-12 * pq.frobenius_norm().max(1.0));
    }

    #[test]
    fn orthonormalize_gives_orthonormal_span(
        n in 1usize..=4, count in 1usize..=20, seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let mats: Vec<ComplexMatrix> = (0..count).map(|_| random_gaussian(n, n, &mut r)).collect();
        let q = orthonormalize_hs(&mats, 1e-9).unwrap();
        prop_assert_eq!(q.len(), count.min(n * n));
        for (i, a) in q.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((hs_inner(a, b).unwrap() - C64::new(want, 0.0)).norm() <= 1e-12);
            }
        }
        for m in &mats {
            let proj = q.iter().fold(ComplexMatrix::zeros(n, n), |acc, e| {
                &acc + &e.scale(hs_inner(e, m).unwrap())
            });
            prop_assert!(dist(&proj, m) <= 1e-10 * m.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn random_systems_are_operator_systems((n, d, seed) in system_params()) {
        let s = OperatorSystem::random(n, d, seed).unwrap();
        prop_assert_eq!(s.dim(), d);
        s.check_invariants(1e-9).unwrap();
        let again = OperatorSystem::from_generators(n, s.basis()).unwrap();
        prop_assert!(again.equals(&s, 1e-8).unwrap());
        prop_assert!(s.projector_distance(&again).unwrap() <= 1e-10);
    }

    #[test]
    fn both_constructions_round_trip((n, d, seed) in system_params(), kind in kind_strategy()) {
        let s = OperatorSystem::random(n, d, seed).unwrap();
        let effects = effect_basis(&s, kind).unwrap();
        let check = effects.check().unwrap();
        prop_assert!(check.passes(kind), "{:?}", check);
        prop_assert_eq!(effects.len(), d);
        prop_assert!(effects.span().unwrap().equals(&s, 1e-8).unwrap());
        let channel = synthesize_channel(&effects).unwrap();
        prop_assert!(channel.check().unwrap().passes());
        prop_assert!(kraus_orthogonality_error(&channel, &effects) <= 1e-8);
        let graph = operator_graph(&channel).unwrap();
        graph.check_invariants(channel.kraus_count()).unwrap();
        prop_assert!(graph.system.equals(&s, 1e-8).unwrap());
    }

    #[test]
    fn graph_routes_agree((n, m, k, seed) in channel_params()) {
        let ch = random_channel(n, m, k, seed).unwrap();
        let direct = operator_graph(&ch).unwrap();
        let dual = graph_via_dual_complementary(&ch).unwrap();
        direct.check_invariants(k).unwrap();
        prop_assert!(direct.system.equals(&dual.system, 1e-8).unwrap());
        prop_assert!(direct.system.dim() <= (k * k).min(n * n));
    }

    #[test]
    fn channels_map_states_to_states((n, m, k, seed) in channel_params()) {
        let ch = random_channel(n, m, k, seed).unwrap();
        let mut r = rng(seed ^ 0x5eed);
        for channel in [ch.clone(), ch.complementary()] {
            let rho = random_state(n, &mut r);
            let out = channel.apply(&rho).unwrap();
            prop_assert!((out.trace() - C64::new(1.0, 0.0)).norm() <= 1e-12);
            prop_assert!(out.hermiticity_defect() <= 1e-12);
            prop_assert!(eig_hermitian(&out).unwrap().min() >= -1e-12);
        }
    }

    #[test]
    fn equality_is_an_equivalence(
        (n, d, seed) in system_params(), d2 in 1usize..=25, seed2 in any::<u64>(),
    ) {
        let s = OperatorSystem::random(n, d, seed).unwrap();
        let t = OperatorSystem::random(n, d2.min(n * n), seed2).unwrap();
        let rebuilt = OperatorSystem::from_generators(n, s.basis()).unwrap();
        prop_assert!(s.equals(&s, 1e-8).unwrap());
        prop_assert_eq!(s.equals(&t, 1e-8).unwrap(), t.equals(&s, 1e-8).unwrap());
        prop_assert!(s.equals(&rebuilt, 1e-8).unwrap() && rebuilt.equals(&s, 1e-8).unwrap());
        if s.equals(&t, 1e-8).unwrap() {
            prop_assert!(rebuilt.equals(&t, 1e-8).unwrap());
        }
    }

    #[test]
    fn distinguishability_is_symmetric((n, d, seed) in system_params(), state_seed in any::<u64>()) {
        let s = OperatorSystem::random(n, d, seed).unwrap();
        let mut r = rng(state_seed);
        let phi = unit_vector(n, &mut r);
        let psi = unit_vector(n, &mut r);
        prop_assert_eq!(
            zero_error_distinguishable(&phi, &psi, &s).unwrap(),
            zero_error_distinguishable(&psi, &phi, &s).unwrap()
        );
        // The identity is in every graph, so no state is distinguishable from itself.
        prop_assert!(!zero_error_distinguishable(&phi, &phi, &s).unwrap());
    }

    #[test]
    fn documents_round_trip_exactly((n, m, k, seed) in channel_params(), kind in kind_strategy()) {
        let ch = random_channel(n, m, k, seed).unwrap();
        let Document::Channel(back) = parse(&emit(&ch.clone().into())).unwrap() else {
            panic!("kind changed");
        };
        prop_assert_eq!(&back, &ch);
        let s = OperatorSystem::random(n, n, seed).unwrap();
        let text = emit(&s.clone().into());
        let Document::OperatorSystem(t) = parse(&text).unwrap() else { panic!("kind changed") };
        prop_assert_eq!(t.basis(), s.basis());
        prop_assert_eq!(emit(&t.into()), text);
        let e = effect_basis(&s, kind).unwrap();
        let Document::EffectBasis(f) = parse(&emit(&e.clone().into())).unwrap() else {
            panic!("kind changed");
        };
        prop_assert_eq!(f.effects(), e.effects());
    }
}

#[test]
fn basis_states_of_diagonal_channels_are_distinguishable() {
    // Dephasing keeps |0> and |1> apart: its graph is the diagonal matrices.
    let p0 = ComplexMatrix::from_diag(&[1.0, 0.0]);
    let p1 = ComplexMatrix::from_diag(&[0.0, 1.0]);
    let ch = QuantumChannel::new(2, 2, vec![p0, p1]).unwrap();
    let g = operator_graph(&ch).unwrap().system;
    assert_eq!(g.dim(), 2);
    let e0 = ComplexMatrix::basis_vector(2, 0);
    let e1 = ComplexMatrix::basis_vector(2, 1);
    assert!(zero_error_distinguishable(&e0, &e1, &g).unwrap());
    let plus = ComplexMatrix::column(&[C64::new(0.5f64.sqrt(), 0.0); 2]);
    assert!(!zero_error_distinguishable(&e0, &plus, &g).unwrap());
}
