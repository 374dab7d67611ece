use coadjoint::diagnostics::{
    stability_probe, strong_order, OrderFit, OrderStudy, StabilityReport, Verdict,
};
use coadjoint::integrators::{Method, StepperConfig};
use coadjoint::models::{build_heavy_top, HeavyTopParams};

#[test]
fn order_fit_recovers_a_power_law() {
    let dts = vec![0.1, 0.05, 0.025, 0.0125];
    let errors: Vec<f64> = dts.iter().map(|d: &f64| 3.0 * d.powf(1.5)).collect();
    let fit = OrderFit::fit(dts, errors, 10).unwrap();
    assert!((fit.slope - 1.5).abs() < 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(OrderFit::fit(vec![0.1], vec![1.0], 1).is_err());
    assert!(OrderFit::fit(vec![0.1, 0.2], vec![0.0, 1.0], 1).is_err());
}

#[test]
fn largest_stable_stops_at_the_first_failure() {
    let r = StabilityReport {
        verdicts: vec![
            (0.1, Verdict::Stable),
            (0.2, Verdict::Stable),
            (0.4, Verdict::ChordFailed),
            (0.8, Verdict::Stable),
        ],
    };
    assert_eq!(r.largest_stable(), Some(0.2));
    assert_eq!(r.verdict_at(0.4), Some(Verdict::ChordFailed));
    let none = StabilityReport { verdicts: vec![(0.1, Verdict::Diverged)] };
    assert_eq!(none.largest_stable(), None);
}

#[test]
fn probe_sorts_and_classifies() {
    let m = build_heavy_top(&HeavyTopParams::default()).unwrap();
    let r = stability_probe(&m.algebra, &m.hamiltonian, &m.initial, &[0.1, 0.01, 50.0], 10.0, 1, &StepperConfig::default())
        .unwrap();
    let dts: Vec<f64> = r.verdicts.iter().map(|(d, _)| *d).collect();
    assert_eq!(dts, vec![0.01, 0.1, 50.0]);
    assert_eq!(r.verdict_at(0.01), Some(Verdict::Stable));
    assert_eq!(r.verdict_at(50.0), Some(Verdict::ChordFailed));
}

#[test]
fn small_strong_order_study_is_reproducible() {
    let m = build_heavy_top(&HeavyTopParams::default()).unwrap();
    let study = OrderStudy {
        base_dt: 0.1,
        t_final: 0.5,
        levels: vec![1, 2, 3],
        reference_level: 5,
        seeds: (0..8).collect(),
    };
    let cfg = StepperConfig::with_method(Method::EulerMaruyamaMk);
    let a = strong_order(&m.algebra, &m.hamiltonian, &m.initial, &study, &cfg).unwrap();
    let b = strong_order(&m.algebra, &m.hamiltonian, &m.initial, &study, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n_samples, 8);
    assert_eq!(a.dts, vec![0.05, 0.025, 0.0125]);
    assert!(a.slope > 0.5, "slope {}", a.slope);
}

#[test]
fn strong_order_needs_a_finer_reference() {
    let m = build_heavy_top(&HeavyTopParams::default()).unwrap();
    let study = OrderStudy {
        base_dt: 0.1,
        t_final: 0.5,
        levels: vec![1, 2, 3],
        reference_level: 4,
        seeds: vec![0],
    };
    assert!(strong_order(&m.algebra, &m.hamiltonian, &m.initial, &study, &StepperConfig::default()).is_err());
}
