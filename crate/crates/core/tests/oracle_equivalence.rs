mod common;

use common::*;
use kaon_bell::linalg::{c, ComplexVec4};
use kaon_bell::observable::{correlation_of, joint_probs};
use kaon_bell::{
    correlation, oracle_correlation, oracle_joint_probs, psi_minus, EffectiveObservable,
    Measurement, PhysicalConstants, TwoQubitState,
};
use proptest::prelude::*;

fn max_trace_vs_oracle(consts: &PhysicalConstants, draws: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let psi = psi_minus();
    let rho = TwoQubitState::pure(&psi).unwrap();
    (0..draws)
        .map(|_| {
            let a = random_measurement(&mut r, 10.0);
            let b = random_measurement(&mut r, 10.0);
            let trace = correlation(&a, &b, &rho, consts).unwrap();
            let oracle = oracle_correlation(&a, &b, &psi, consts).unwrap();
            (trace - oracle).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn trace_form_matches_oracle_without_cp_violation() {
    let worst = max_trace_vs_oracle(&cp_conserving(), 1000, 1);
    assert!(worst < 1e-10, "worst discrepancy {worst:e}");
}

#[test]
fn trace_form_matches_oracle_at_default_constants() {
    let worst = max_trace_vs_oracle(&PhysicalConstants::pdg(), 1000, 2);
    assert!(worst < 1e-5, "worst discrepancy {worst:e}");
}

#[test]
fn closed_form_observable_differs_only_at_order_delta() {
    let c0 = PhysicalConstants::pdg();
    let mut r = rng(3);
    let psi = psi_minus();
    let rho = TwoQubitState::pure(&psi).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = random_measurement(&mut r, 10.0);
        let b = random_measurement(&mut r, 10.0);
        let closed = correlation_of(
            &EffectiveObservable::closed_form(&a, &c0).unwrap(),
            &EffectiveObservable::closed_form(&b, &c0).unwrap(),
            &rho,
        );
        worst = worst.max((closed - oracle_correlation(&a, &b, &psi, &c0).unwrap()).abs());
    }
    eprintln!(
        "closed-form vs oracle, worst |dE| over 1000 draws: {worst:.3e} (delta = {:.3e})",
        c0.delta()
    );
    assert!(worst < 10.0 * c0.delta());

    // without CP violation the closed form is exact
    let cp = cp_conserving();
    let a = Measurement::new(random_quasispin(&mut r), 1.7).unwrap();
    let b = Measurement::new(random_quasispin(&mut r), 0.4).unwrap();
    let closed = correlation_of(
        &EffectiveObservable::closed_form(&a, &cp).unwrap(),
        &EffectiveObservable::closed_form(&b, &cp).unwrap(),
        &rho,
    );
    assert!((closed - oracle_correlation(&a, &b, &psi, &cp).unwrap()).abs() < 1e-12);
}

fn arb_measurement() -> impl Strategy<Value = Measurement> {
    (
        0.0..=std::f64::consts::PI,
        0.0..std::f64::consts::TAU,
        0.0..20.0_f64,
    )
        .prop_map(|(th, ph, t)| {
            Measurement::new(kaon_bell::Quasispin { theta: th, phi: ph }, t).unwrap()
        })
}

fn arb_state() -> impl Strategy<Value = ComplexVec4> {
    prop::array::uniform8(-1.0..1.0_f64)
        .prop_filter("non-degenerate", |v| {
            v.iter().map(|x| x * x).sum::<f64>() > 1e-3
        })
        .prop_map(|v| {
            let psi = ComplexVec4::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7]));
            psi.normalize()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn heisenberg_probabilities_match_oracle(a in arb_measurement(), b in arb_measurement(), psi in arb_state()) {
        let consts = PhysicalConstants::pdg();
        let rho = TwoQubitState::pure(&psi).unwrap();
        let h = joint_probs(&a, &b, &rho, &consts).unwrap().as_array();
        let o = oracle_joint_probs(&a, &b, &psi, &consts).unwrap().as_array();
        for (x, y) in h.iter().zip(o) {
            prop_assert!((x - y).abs() < 1e-10, "{:?} vs {:?}", h, o);
        }
    }

    #[test]
    fn oracle_probabilities_are_a_distribution(a in arb_measurement(), b in arb_measurement(), psi in arb_state()) {
        let p = oracle_joint_probs(&a, &b, &psi, &PhysicalConstants::pdg()).unwrap();
        for x in p.as_array() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&x));
        }
        prop_assert!((p.sum() - 1.0).abs() < 1e-12);
        prop_assert!(p.correlation().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn correlation_is_symmetric_under_party_exchange(a in arb_measurement(), b in arb_measurement()) {
        // psi- is antisymmetric, so |psi-><psi-| is invariant under the swap
        let consts = PhysicalConstants::pdg();
        let psi = psi_minus();
        let ab = oracle_correlation(&a, &b, &psi, &consts).unwrap();
        let ba = oracle_correlation(&b, &a, &psi, &consts).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
    }
}
