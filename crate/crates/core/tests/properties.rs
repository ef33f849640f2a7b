use dfkg_core::observability::{elementary_constants, observability_constant, ObservabilityQuery};
use dfkg_core::rates::{fit_exponential, fit_power_law, predicted_decay};
use dfkg_core::resolvent::{assemble_helmholtz, max_resolved_k, solve_resolvent};
use dfkg_core::semigroup::{damp, energy_weighted, rotate, State};
use dfkg_core::{frac_laplacian_apply, make_grid, multiply_pointwise, DampingProfile, EnergyWeight, Grid, SpectralField};
use num_complex::Complex64 as c64;
use proptest::prelude::*;

fn field(grid: &Grid, parts: &[(f64, f64)]) -> SpectralField {
    let coeffs = parts.iter().map(|&(re, im)| c64::new(re, im)).collect();
    SpectralField::from_coeffs(grid, coeffs).unwrap()
}

fn real_field(grid: &Grid, parts: &[(f64, f64)]) -> SpectralField {
    field(grid, parts).map_values(|_, v| c64::new(v.re, 0.0))
}

fn coeff_parts(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transforms_round_trip(parts in coeff_parts(32), half in 0.5..3.0f64) {
        let grid = make_grid(32, half).unwrap();
        let values: Vec<c64> = parts.iter().map(|&(a, b)| c64::new(a, b)).collect();
        let back = grid.inverse(&grid.forward(&values));
        for (a, b) in back.iter().zip(&values) {
            prop_assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn parseval(parts in coeff_parts(32)) {
        let grid = make_grid(32, 1.0).unwrap();
        let f = field(&grid, &parts);
        let spectral = f.inner_spectral(&f).unwrap().re.sqrt();
        prop_assert!((f.l2_norm() - spectral).abs() <= 1e-12 * spectral.max(1e-300));
    }

    #[test]
    fn fractional_laplacian_is_symmetric_and_nonnegative(
        a in coeff_parts(32),
        b in coeff_parts(32),
        s in 0.1..4.0f64,
    ) {
        let grid = make_grid(32, 1.0).unwrap();
        let (f, g) = (field(&grid, &a), field(&grid, &b));
        let lhs = frac_laplacian_apply(&f, s).unwrap().inner(&g).unwrap();
        let rhs = f.inner(&frac_laplacian_apply(&g, s).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        let rf = real_field(&grid, &a);
        prop_assert!(frac_laplacian_apply(&rf, s).unwrap().inner(&rf).unwrap().re >= -1e-10);
    }

    #[test]
    fn elementary_bound_holds(s in 0.2..3.5f64, x in 1e-3..10.0f64, y in 1e-3..10.0f64) {
        let (d, dd) = elementary_constants(s, 2000).unwrap();
        prop_assert!(d <= s.min(1.0) + 1e-12 && dd >= s.max(1.0) - 1e-12);
        let base = x.max(y).powf(s - 1.0) * (x - y).abs();
        let mid = (x.powf(s) - y.powf(s)).abs();
        let slack = 1e-12 * mid.max(base);
        prop_assert!(d * base <= mid + slack);
        prop_assert!(mid <= dd * base + slack);
    }

    #[test]
    fn exponent_algebra(s in 0.05..5.0f64) {
        let p = predicted_decay(s).unwrap();
        prop_assert!((p.resolvent_exponent_energy - p.resolvent_exponent_l2 - 1.0).abs() <= 1e-12);
        if s < 2.0 {
            let alpha = p.bt_alpha.unwrap();
            prop_assert!((alpha * p.poly_exponent.unwrap() - 1.0).abs() <= 1e-12);
            prop_assert!((alpha - p.resolvent_exponent_energy).abs() <= 1e-12);
        } else {
            prop_assert!(p.poly_exponent.is_none());
        }
    }

    #[test]
    fn fits_are_scale_equivariant(c in 1e-6..1e6f64, rate in 0.01..2.0f64, wobble in 0.0..0.3f64) {
        let xs: Vec<f64> = (1..=50).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-rate * x).exp() * (1.0 + wobble * x.sin())).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| c * y).collect();
        let (a, b) = (fit_exponential(&xs, &ys, 0.5).unwrap(), fit_exponential(&xs, &scaled, 0.5).unwrap());
        prop_assert!((a.slope - b.slope).abs() <= 1e-9);
        prop_assert!((b.intercept - a.intercept - c.ln()).abs() <= 1e-9);
        let (p, q) = (fit_power_law(&xs, &ys, 0.5).unwrap(), fit_power_law(&xs, &scaled, 0.5).unwrap());
        prop_assert!((p.slope - q.slope).abs() <= 1e-9);
    }

    #[test]
    fn damping_is_bounded_and_periodic(
        amplitude in 0.01..5.0f64,
        center in -1.0..1.0f64,
        half_width in 0.05..0.8f64,
        x in -3.0..3.0f64,
    ) {
        let gamma = DampingProfile::smoothed_indicator(amplitude, center, half_width, 0.1, 2.0).unwrap();
        let v = gamma.eval(x);
        prop_assert!((0.0..=amplitude).contains(&v));
        prop_assert!((v - gamma.eval(x + 2.0)).abs() <= 1e-12);
        prop_assert!((gamma.eval(center) - amplitude).abs() <= 1e-12);
    }

    #[test]
    fn sub_flows_conserve_or_dissipate(
        a in coeff_parts(32),
        b in coeff_parts(32),
        s in 0.3..3.0f64,
        tau in 0.0..2.0f64,
    ) {
        let grid = make_grid(32, 1.0).unwrap();
        let st = State::new(real_field(&grid, &a), real_field(&grid, &b), 0.0).unwrap();
        let e0 = energy_weighted(&st, s, 1.0, EnergyWeight::Energy);
        let rotated = rotate(&st, s, 1.0, tau).unwrap();
        prop_assert!((energy_weighted(&rotated, s, 1.0, EnergyWeight::Energy) - e0).abs() <= 1e-12 * e0);
        let gamma = DampingProfile::indicator(1.0, 0.0, 0.4, 2.0).unwrap();
        let damped = damp(&st, &gamma, tau).unwrap();
        prop_assert!(energy_weighted(&damped, s, 1.0, EnergyWeight::Energy) <= e0 * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn whole_window_constant_is_at_most_one(s in 0.5..3.0f64, lambda in -50.0..200.0f64) {
        let n = ObservabilityQuery::required_modes(s, lambda).max(32);
        let c = observability_constant(&ObservabilityQuery::new(s, lambda, 1.0, n).unwrap()).unwrap();
        prop_assert!(c <= 1.0 + 1e-10);
    }

    #[test]
    fn imaginary_part_identity(
        parts in coeff_parts(32),
        s in 0.8..3.0f64,
        m in 0.5..2.0f64,
        frac in 0.05..1.0f64,
    ) {
        let grid = make_grid(32, 1.0).unwrap();
        let k = frac * max_resolved_k(s, &grid);
        let gamma = DampingProfile::indicator(1.0, 0.2, 0.4, 2.0).unwrap();
        let f = field(&grid, &parts);
        let u = solve_resolvent(&assemble_helmholtz(s, m, k, &gamma, &grid).unwrap(), &f).unwrap();
        let lhs = f.inner(&u).unwrap().im;
        let rhs = k * multiply_pointwise(&u, &gamma).unwrap().inner(&u).unwrap().re;
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1e-12));
    }
}
