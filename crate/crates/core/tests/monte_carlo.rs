use kaon_bell::mc::{events_to_csv, outcome_tables, s_from_tables, Tallies};
use kaon_bell::{estimate_s, generate_events, psi_minus, BellSetting, McConfig, PhysicalConstants};

fn cfg(n: u64, seed: u64) -> McConfig {
    McConfig {
        n_events: n,
        seed,
        efficiency_a: 1.0,
        efficiency_b: 1.0,
    }
}

#[test]
fn estimate_agrees_with_exact_value() {
    let c = PhysicalConstants::pdg();
    let s = BellSetting::reference();
    let events = generate_events(&s, &psi_minus(), &c, &cfg(300_000, 21)).unwrap();
    let est = estimate_s(&events).unwrap();
    let exact = s_from_tables(&outcome_tables(&s, &psi_minus(), &c).unwrap());
    assert!(
        (est.s_hat - exact).abs() < 3.0 * est.stderr,
        "{est} vs {exact}"
    );
    let z = Tallies::from_events(&events).no_signaling_z();
    assert!(z.iter().all(|v| v.abs() < 4.0), "{z:?}");
}

#[test]
fn settings_are_chosen_uniformly() {
    let c = PhysicalConstants::pdg();
    let events = generate_events(
        &BellSetting::reference(),
        &psi_minus(),
        &c,
        &cfg(100_000, 22),
    )
    .unwrap();
    let t = Tallies::from_events(&events);
    for a in 0..2 {
        for b in 0..2 {
            let frac = t.cell_total(a, b) as f64 / 100_000.0;
            assert!((frac - 0.25).abs() < 0.006, "cell ({a},{b}) has {frac}");
        }
    }
}

#[test]
fn tallies_merge_in_any_order() {
    let c = PhysicalConstants::pdg();
    let events = generate_events(
        &BellSetting::reference(),
        &psi_minus(),
        &c,
        &cfg(10_000, 23),
    )
    .unwrap();
    let whole = Tallies::from_events(&events);
    let (x, y) = events.split_at(3_333);
    assert_eq!(
        Tallies::from_events(x).merge(Tallies::from_events(y)),
        whole
    );
    assert_eq!(
        Tallies::from_events(y).merge(Tallies::from_events(x)),
        whole
    );
}

#[test]
fn csv_output_is_reproducible_and_well_formed() {
    let c = PhysicalConstants::pdg();
    let s = BellSetting::reference();
    let a = events_to_csv(&generate_events(&s, &psi_minus(), &c, &cfg(2_000, 24)).unwrap());
    let b = events_to_csv(&generate_events(&s, &psi_minus(), &c, &cfg(2_000, 24)).unwrap());
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next(),
        Some("event_id,setting_a,setting_b,outcome_a,outcome_b")
    );
    for (i, l) in lines.enumerate() {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[0], i.to_string());
        assert!(matches!(f[1], "n" | "nprime"));
        assert!(matches!(f[2], "m" | "mprime"));
        assert!(matches!(f[3], "Y" | "N") && matches!(f[4], "Y" | "N"));
    }
}

#[test]
fn unnormalized_state_is_rejected() {
    let c = PhysicalConstants::pdg();
    let psi = psi_minus() * kaon_bell::linalg::real(2.0);
    assert!(generate_events(&BellSetting::reference(), &psi, &c, &cfg(10, 1)).is_err());
}
