use dfkg_core::rates::fit_envelope;
use dfkg_core::resolvent::{geometric_grid, scan_resolvent, SpacePair};
use dfkg_core::semigroup::{simulate, InitialData, SimConfig};
use dfkg_core::{make_grid, DampingProfile, EnergyWeight};

#[test]
fn constant_damping_decay_rate_is_half_the_damping() {
    // every mode with omega > c/2 has amplitude e^{-ct/2}
    let c = 0.4;
    let grid = make_grid(32, 1.0).unwrap();
    let gamma = DampingProfile::constant(c, 2.0).unwrap();
    let cfg = SimConfig::new(
        2.0,
        1.0,
        gamma,
        grid,
        0.005,
        60.0,
        InitialData::RandomBandLimited { seed: 9, max_mode: 6 },
    )
    .unwrap()
    .with_weight(EnergyWeight::Energy)
    .with_record_stride(10)
    .unwrap();
    let trace = simulate(&cfg).unwrap();
    let fit = fit_envelope(&trace.times, &trace.normalized(), 0.5).unwrap();
    assert!((fit.rate() - c / 2.0).abs() <= 0.02 * c / 2.0, "rate {}", fit.rate());
}

#[test]
fn resolved_scan_at_threshold_order_is_bounded() {
    let grid = make_grid(128, 1.0).unwrap();
    let gamma = DampingProfile::smoothed_for_grid(1.0, 0.0, 0.5, 2.0, &grid).unwrap();
    let ks = geometric_grid(1.0, 32.0, 16).unwrap();
    let scan = scan_resolvent(2.0, 1.0, &gamma, &grid, &ks, SpacePair::L2ToL2).unwrap();
    assert!(scan.bound.stabilized, "{:?}", scan.bound);
    assert_eq!(scan.norms.len(), ks.len());
    assert!(scan.norms.iter().all(|n| n.is_finite() && *n > 0.0));
}
