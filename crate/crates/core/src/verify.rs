//! Invariant and acceptance checks, each reported as a [`CheckResult`].

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::damping::DampingProfile;
use crate::error::Result;
use crate::observability::{
    check_periodization_identity, elementary_constants, no_control_constant, observability_constant,
    shifted_group_residual, LineFunction, ObservabilityQuery, ShiftedOperator,
};
use crate::rates::{self, check_upper_bound, fit_envelope, fit_exponential, fit_power_law, BoundKind};
use crate::resolvent::{
    assemble_generator, assemble_helmholtz, avoid_resonances, full_resolvent_apply,
    full_resolvent_apply_monolithic, geometric_grid, max_resolved_k, modes_required, resolvent_norm,
    resolvent_norm_power, scan_resolvent, solve_resolvent, SpacePair,
};
use crate::semigroup::{
    dissipation_residual, energy_weighted, evolve, rotate, simulate, simulate_states, InitialData,
    SimConfig, State,
};
use crate::spectral::{
    frac_laplacian_apply, make_grid, multiply_pointwise, EnergyWeight, Grid, SpectralField,
};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// The claim under test, in words.
    pub paper_ref: String,
    pub expected: String,
    pub measured: String,
    pub tolerance: String,
    pub pass: bool,
    /// The check could not be evaluated because a numerical guard tripped.
    #[serde(skip)]
    pub numerical_guard: bool,
}

impl CheckResult {
    fn new(
        name: &str,
        paper_ref: &str,
        expected: &str,
        tolerance: &str,
        outcome: Result<Outcome>,
    ) -> Self {
        let (pass, measured, numerical_guard) = match outcome {
            Ok(o) => (o.pass, o.measured, o.guard),
            Err(e) => (false, format!("error: {e}"), e.is_numerical_guard()),
        };
        Self {
            name: name.to_string(),
            paper_ref: paper_ref.to_string(),
            expected: expected.to_string(),
            measured,
            tolerance: tolerance.to_string(),
            pass,
            numerical_guard,
        }
    }

    /// A check evaluated outside this module.
    pub fn evaluated(
        name: &str,
        paper_ref: &str,
        expected: &str,
        tolerance: &str,
        measured: String,
        pass: bool,
    ) -> Self {
        Self::new(name, paper_ref, expected, tolerance, Ok(Outcome::new(pass, measured)))
    }

    /// One-line summary for terminal output.
    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured
        )
    }
}

/// Result of a check body.
struct Outcome {
    pass: bool,
    measured: String,
    guard: bool,
}

impl Outcome {
    fn new(pass: bool, measured: impl Into<String>) -> Self {
        Self {
            pass,
            measured: measured.into(),
            guard: false,
        }
    }
}

/// Sub-results combined into one outcome.
#[derive(Default)]
struct Parts {
    items: Vec<(bool, bool, String)>,
}

impl Parts {
    fn push(&mut self, pass: bool, text: String) {
        self.items.push((pass, false, text));
    }

    fn push_result(&mut self, label: &str, r: Result<(bool, String)>) {
        match r {
            Ok((pass, text)) => self.items.push((pass, false, format!("{label}: {text}"))),
            Err(e) => self.items.push((false, e.is_numerical_guard(), format!("{label}: error: {e}"))),
        }
    }

    fn outcome(self) -> Outcome {
        Outcome {
            pass: self.items.iter().all(|i| i.0),
            guard: self.items.iter().any(|i| !i.0 && i.1),
            measured: self
                .items
                .iter()
                .map(|i| format!("[{}] {}", if i.0 { "ok" } else { "FAIL" }, i.2))
                .collect::<Vec<_>>()
                .join("; "),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_coeffs(grid: &Grid, rng: &mut ChaCha8Rng, max_mode: Option<i64>) -> SpectralField {
    let n = grid.n_modes() as i64;
    let band = max_mode.unwrap_or(n / 2 - 1);
    let coeffs = (0..grid.n_modes())
        .map(|p| {
            let k = grid.wavenumber(p);
            if k.abs() <= band {
                c64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) / (1.0 + k.abs() as f64)
            } else {
                c64::new(0.0, 0.0)
            }
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs).expect("length matches grid")
}

fn random_real_field(grid: &Grid, rng: &mut ChaCha8Rng, max_mode: i64) -> SpectralField {
    let f = random_coeffs(grid, rng, Some(max_mode));
    f.map_values(|_, v| c64::new(v.re, 0.0))
}

// ---------------------------------------------------------------------------
// acceptance

const K_MIN: f64 = 1.0;
const K_MAX: f64 = 256.0;
const K_PER_DECADE: usize = 16;
/// Largest mode count allowed at desk scale.
const DESK_MODES: usize = 1024;
/// Mode count of the resolved resolvent scans.
const SCAN_MODES: usize = 512;
const SLOPE_TOL: f64 = 0.05;

/// Ramp width of the damping used by the time-domain criteria.
const TIME_RAMP: f64 = 0.125;
const TIME_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const TIME_BAND: i64 = 16;
const T_FINAL: f64 = 400.0;
/// `dt * omega_max` used by the time-domain criteria.
const TIME_CFL: f64 = 0.25;

fn scan_damping(grid: &Grid) -> Result<DampingProfile> {
    DampingProfile::smoothed_for_grid(1.0, 0.0, 0.5, 2.0, grid)
}

fn time_damping() -> Result<DampingProfile> {
    DampingProfile::smoothed_indicator(1.0, 0.0, 0.5, TIME_RAMP, 2.0)
}

/// One resolvent bound case. Returns `(pass, text)`; a truncation failure
/// over the requested k-range is a guard error.
fn resolvent_bound_case(s: f64, pair: SpacePair, require_flat: bool, parts: &mut Parts) {
    let label = format!("s={s}");
    let desk = match make_grid(DESK_MODES, 1.0) {
        Ok(g) => g,
        Err(e) => return parts.push_result(&label, Err(e)),
    };
    let reach = max_resolved_k(s, &desk);
    if reach < K_MAX {
        // the requested k-range cannot be resolved at desk scale: record the
        // failure and a diagnostic on the resolved prefix
        let needed = modes_required(s, K_MAX, 1.0);
        let prefix_modes = if pair == SpacePair::Energy { SCAN_MODES / 2 } else { SCAN_MODES };
        let diag = prefix_diagnostic(s, pair, prefix_modes);
        parts.items.push((
            false,
            true,
            format!(
                "{label}: under-resolved: k <= {K_MAX} needs N >= {needed} (> {DESK_MODES}), resolved up to k = {reach:.2}; {diag}"
            ),
        ));
        return;
    }
    let run = || -> Result<(bool, String)> {
        let grid = make_grid(SCAN_MODES, 1.0)?;
        let gamma = scan_damping(&grid)?;
        let ks = geometric_grid(K_MIN, K_MAX, K_PER_DECADE)?;
        let scan = scan_resolvent(s, 1.0, &gamma, &grid, &ks, pair)?;
        let mut pass = scan.bound.stabilized;
        let mut text = format!(
            "exponent {:.4}, sup_ratio {:.4e}, tail/head {:.3}, fitted slope {}",
            scan.bound_exponent,
            scan.bound.sup_ratio,
            scan.bound.growth_factor(),
            scan.fitted_slope.map_or("n/a".into(), |v| format!("{v:.4}"))
        );
        if require_flat {
            let slope = scan.fitted_slope.unwrap_or(f64::INFINITY);
            let sup = scan.norms.iter().cloned().fold(0.0, f64::max);
            pass &= sup.is_finite() && slope <= SLOPE_TOL;
            text.push_str(&format!(", sup norm {sup:.4e}"));
        }
        Ok((pass, text))
    };
    parts.push_result(&label, run());
}

fn prefix_diagnostic(s: f64, pair: SpacePair, modes: usize) -> String {
    let run = || -> Result<String> {
        let grid = make_grid(modes, 1.0)?;
        let gamma = scan_damping(&grid)?;
        let top = max_resolved_k(s, &grid);
        let ks = geometric_grid(K_MIN, top, K_PER_DECADE)?;
        let scan = scan_resolvent(s, 1.0, &gamma, &grid, &ks, pair)?;
        Ok(format!(
            "diagnostic on k in [1, {top:.2}] at N = {modes}: sup_ratio {:.4e}, tail/head {:.3}",
            scan.bound.sup_ratio,
            scan.bound.growth_factor()
        ))
    };
    run().unwrap_or_else(|e| format!("diagnostic unavailable: {e}"))
}

pub fn criterion_resolvent_l2() -> CheckResult {
    let mut parts = Parts::default();
    for s in [0.8, 1.0, 1.5, 2.0, 3.0] {
        resolvent_bound_case(s, SpacePair::L2ToL2, false, &mut parts);
    }
    CheckResult::new(
        "1 resolvent L2->L2 bound",
        "||R(ik)||_{L2->L2} <= C <k>^{4/s-3} for 0<s<2 and <= C <k>^{2/s-2} for s>=2",
        "stabilized sup of norm / <k>^exponent on k in [1, 256]",
        "tail sup <= 1.1 x head sup",
        Ok(parts.outcome()),
    )
}

pub fn criterion_resolvent_energy() -> CheckResult {
    let mut parts = Parts::default();
    for s in [0.8, 1.0, 1.5, 2.0, 3.0] {
        resolvent_bound_case(s, SpacePair::Energy, s >= 2.0, &mut parts);
    }
    CheckResult::new(
        "2 generator resolvent bound on H^{s/2} x L2",
        "||(ik - A)^{-1}|| <= C <k>^{4/s-2} for 0<s<2 and <= C <k>^{2/s-1} for s>=2",
        "stabilized sup of norm / <k>^exponent; for s>=2 also finite sup and no growth",
        "tail sup <= 1.1 x head sup; fitted tail slope <= 0.05",
        Ok(parts.outcome()),
    )
}

/// Normalized trace of one time-domain run.
fn time_trace(s: f64, modes: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = make_grid(modes, 1.0)?;
    let omega = (grid.max_abs_frequency().powf(s) + 1.0).sqrt();
    let cfg = SimConfig::new(
        s,
        1.0,
        time_damping()?,
        grid,
        TIME_CFL / omega,
        T_FINAL,
        InitialData::RandomBandLimited {
            seed,
            max_mode: TIME_BAND,
        },
    )?;
    let stride = ((0.1 / cfg.step_size()).round() as usize).max(1);
    let cfg = cfg.with_record_stride(stride)?;
    let trace = simulate(&cfg)?;
    Ok((trace.times.clone(), trace.normalized()))
}

pub fn criterion_polynomial_decay() -> CheckResult {
    let mut parts = Parts::default();
    for s in [1.0, 4.0 / 3.0] {
        let p = s / (4.0 - 2.0 * s);
        for seed in TIME_SEEDS {
            let run = || -> Result<(bool, String)> {
                let (times, norms) = time_trace(s, 256, seed)?;
                let (mut head, mut tail) = (0.0f64, 0.0f64);
                for (t, e) in times.iter().zip(&norms) {
                    let r = (1.0 + t.powf(p)) * e;
                    if (10.0..=200.0).contains(t) {
                        head = head.max(r);
                    }
                    if *t >= 200.0 {
                        tail = tail.max(r);
                    }
                }
                let pass = head.is_finite() && tail.is_finite() && tail <= 1.1 * head;
                Ok((pass, format!("head sup {head:.3e}, tail sup {tail:.3e}")))
            };
            parts.push_result(&format!("s={s:.4} seed {seed}"), run());
        }
    }
    CheckResult::new(
        "3 polynomial energy decay",
        "||(u,u_t)(t)||_{H^{s/2}xL2} <= C t^{-s/(4-2s)} ||(u,u_t)(0)||_{H^s x H^{s/2}} for 0<s<2",
        "sup over t in [200,400] of (1+t^{s/(4-2s)}) E(t)/E_data within 10% of the sup over [10,200]",
        "factor 1.1",
        Ok(parts.outcome()),
    )
}

pub fn criterion_exponential_decay() -> CheckResult {
    let mut parts = Parts::default();
    for (s, modes) in [(2.0, 128), (3.0, 64)] {
        for seed in TIME_SEEDS {
            let run = || -> Result<(bool, String)> {
                let (times, norms) = time_trace(s, modes, seed)?;
                let keep: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= 10.0).collect();
                let ts: Vec<f64> = keep.iter().map(|&i| times[i]).collect();
                let vs: Vec<f64> = keep.iter().map(|&i| norms[i]).collect();
                let fit = fit_envelope(&ts, &vs, rates::DEFAULT_TAIL_FRACTION)?;
                // violation over the fitted window
                let (peak_t, _) = rates::local_maxima(&ts, &vs);
                let start = if peak_t.len() as f64 * rates::DEFAULT_TAIL_FRACTION >= (2 * rates::MIN_TAIL_POINTS) as f64 {
                    peak_t[peak_t.len() - fit.points_used]
                } else {
                    ts[ts.len() - fit.points_used]
                };
                let violation = ts
                    .iter()
                    .zip(&vs)
                    .filter(|(t, _)| **t >= start)
                    .map(|(t, v)| v / (fit.intercept + fit.slope * t).exp() - 1.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                let pass = fit.rate() > 0.0 && fit.r_squared >= 0.99 && violation <= 0.02;
                Ok((
                    pass,
                    format!(
                        "rate {:.4}, r2 {:.6}, max violation {:.4}",
                        fit.rate(),
                        fit.r_squared,
                        violation.max(0.0)
                    ),
                ))
            };
            parts.push_result(&format!("s={s} seed {seed}"), run());
        }
    }
    CheckResult::new(
        "4 exponential energy decay",
        "||(u,u_t)(t)|| <= C e^{-lambda_0 t} ||(u,u_t)(0)|| for s>=2",
        "envelope rate > 0 with r^2 >= 0.99; fitted envelope bounds the tail",
        "violation <= 2%",
        Ok(parts.outcome()),
    )
}

fn observability_lambda_grid(s: f64, geometric: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..geometric)
        .map(|i| 10f64.powf(4.0 * i as f64 / (geometric - 1) as f64))
        .collect();
    grid.extend([1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|k| (PI * k).powf(s)));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

pub fn criterion_observability() -> CheckResult {
    let mut parts = Parts::default();
    for s in [1.0, 2.0] {
        let run = || -> Result<(bool, String)> {
            let n = ObservabilityQuery::required_modes(s, 1e4);
            let max_over = |grid: &[f64]| -> Result<f64> {
                let mut best = 0.0f64;
                for &lambda in grid {
                    best = best.max(observability_constant(&ObservabilityQuery::new(s, lambda, 0.3, n)?)?);
                }
                Ok(best)
            };
            let coarse = max_over(&observability_lambda_grid(s, 35))?;
            let fine = max_over(&observability_lambda_grid(s, 350))?;
            let change = rel(fine, coarse);
            Ok((
                coarse.is_finite() && change <= 0.1,
                format!("max C_q {coarse:.5} (40 points), {fine:.5} (355 points), change {change:.4}"),
            ))
        };
        parts.push_result(&format!("s={s}"), run());
    }
    CheckResult::new(
        "5 observability constant",
        "||u|| <= C_delta (<lambda>^{1/s-1} ||f|| + ||u||_{[-delta,delta]}) uniformly in lambda",
        "max C_q over lambda in [1, 1e4] finite and stable under 10x refinement",
        "relative change <= 10%",
        Ok(parts.outcome()),
    )
}

pub fn criterion_elementary() -> CheckResult {
    let run = || -> Result<Outcome> {
        let mut parts = Parts::default();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for s in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let (d, dd) = elementary_constants(s, 10_000)?;
            let mut violations = 0;
            for _ in 0..1000 {
                let x: f64 = rng.gen_range(1e-6..10.0);
                let y: f64 = rng.gen_range(1e-6..10.0);
                let base = x.max(y).powf(s - 1.0) * (x - y).abs();
                let mid = (x.powf(s) - y.powf(s)).abs();
                let slack = 1e-12 * mid.max(base);
                if d * base > mid + slack || mid > dd * base + slack {
                    violations += 1;
                }
            }
            parts.push(violations == 0, format!("s={s}: (d, D) = ({d:.6}, {dd:.6}), {violations} violations"));
        }
        let (d1, dd1) = elementary_constants(1.0, 10_000)?;
        let (d2, dd2) = elementary_constants(2.0, 10_000)?;
        let exact = (d1 - 1.0).abs() <= 1e-9 && (dd1 - 1.0).abs() <= 1e-9 && (d2 - 1.0).abs() <= 1e-9 && (dd2 - 2.0).abs() <= 1e-9;
        parts.push(exact, "(d_1, D_1) = (1, 1) and (d_2, D_2) = (1, 2)".into());
        Ok(parts.outcome())
    };
    CheckResult::new(
        "6 elementary two-sided bound",
        "d_s max(x,y)^{s-1}|x-y| <= |x^s - y^s| <= D_s max(x,y)^{s-1}|x-y|",
        "zero violations on 1000 random pairs per s; exact constants at s = 1, 2",
        "1e-9 on the constants",
        run(),
    )
}

pub fn criterion_shift_and_periodization() -> CheckResult {
    let run = || -> Result<Outcome> {
        let mut parts = Parts::default();
        let grid = make_grid(128, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_coeffs(&grid, &mut rng, Some(24));
        let mut worst = 0.0f64;
        let mut worst_unit = 0.0f64;
        for j in [-2.0, -1.0, 1.0, 2.0, 3.0] {
            let op = ShiftedOperator::new(j * grid.frequency_spacing(), 1.4, &grid)?;
            for t in [0.3, 1.0, 2.7, 5.0, 10.0] {
                let r = shifted_group_residual(&op, t, &f)?;
                worst = worst.max(r.residual);
                worst_unit = worst_unit.max(r.unitarity_defect);
            }
        }
        parts.push(
            worst <= 1e-10 && worst_unit <= 1e-10,
            format!("group residual max {worst:.3e}, unitarity defect max {worst_unit:.3e} on 5x5 (alpha, t)"),
        );
        for (label, g) in [("gaussian", LineFunction::gaussian(1.0)?), ("bump", LineFunction::bump(0.9)?)] {
            let r = check_periodization_identity(&g, 64, &grid)?;
            parts.push(r.residual <= 1e-6, format!("periodization {label}: residual {:.3e}", r.residual));
        }
        Ok(parts.outcome())
    };
    CheckResult::new(
        "7 shifted group and periodization",
        "e^{itH_alpha} = e^{i alpha x} e^{itH_0} e^{-i alpha x}; ||g||^2 = int ||Pi_alpha g||^2 d alpha",
        "residuals below tolerance",
        "1e-10 (group), 1e-6 (periodization)",
        run(),
    )
}

/// A random damped Helmholtz instance on `grid`.
fn random_instance(rng: &mut ChaCha8Rng, grid: &Grid) -> Result<(f64, f64, f64, DampingProfile)> {
    let s = rng.gen_range(0.6..3.0);
    let m = rng.gen_range(0.5..2.0);
    let amplitude = rng.gen_range(0.5..2.0);
    let center = rng.gen_range(-1.0..1.0);
    let half_width = rng.gen_range(0.1..0.6);
    let gamma = if rng.gen::<bool>() {
        DampingProfile::indicator(amplitude, center, half_width, 2.0)?
    } else {
        DampingProfile::smoothed_for_grid(amplitude, center, half_width, 2.0, grid)?
    };
    let k = rng.gen_range(0.5..max_resolved_k(s, grid).min(20.0).max(0.6));
    Ok((s, m, k, gamma))
}

pub fn criterion_exact_identities() -> CheckResult {
    let run = || -> Result<Outcome> {
        let grid = make_grid(128, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let (mut imag, mut adj, mut block) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..20 {
            let (s, m, k, gamma) = random_instance(&mut rng, &grid)?;
            let f = random_coeffs(&grid, &mut rng, None);
            let g = random_coeffs(&grid, &mut rng, None);
            let u = solve_resolvent(&assemble_helmholtz(s, m, k, &gamma, &grid)?, &f)?;
            let lhs = f.inner(&u)?.im;
            let gu = multiply_pointwise(&u, &gamma)?;
            let rhs = k * gu.inner(&u)?.re;
            imag = imag.max(rel(lhs, rhs));
            let v = solve_resolvent(&assemble_helmholtz(s, m, -k, &gamma, &grid)?, &g)?;
            let a = u.inner(&g)?;
            let b = f.inner(&v)?;
            adj = adj.max((a - b).norm() / (u.l2_norm() * g.l2_norm()));
            let (f1, f2) = (f.clone(), g.clone());
            let generator = assemble_generator(s, m, &gamma, &grid, EnergyWeight::Sobolev)?;
            let (a1, a2) = full_resolvent_apply(s, m, k, &gamma, &grid, &f1, &f2)?;
            let (b1, b2) = full_resolvent_apply_monolithic(&generator, k, &f1, &f2)?;
            let diff = generator.energy_norm(&a1.sub(&b1)?, &a2.sub(&b2)?)?;
            block = block.max(diff / generator.energy_norm(&b1, &b2)?);
        }
        let mut parts = Parts::default();
        parts.push(imag <= 1e-8, format!("imaginary-part identity max rel err {imag:.3e}"));
        parts.push(adj <= 1e-9, format!("adjoint symmetry max err {adj:.3e}"));
        parts.push(block <= 1e-9, format!("block formula vs monolithic max rel err {block:.3e}"));
        Ok(parts.outcome())
    };
    CheckResult::new(
        "8 exact identities on computed solutions",
        "Im<f,u> = k||sqrt(gamma) u||^2; R(ik)* = R(-ik); block formula for (ik - A)^{-1}",
        "identities hold on 20 random instances each",
        "1e-8 (imaginary part), 1e-9 (adjoint, block)",
        run(),
    )
}

/// Final states of one run at several step sizes.
fn richardson_orders() -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = make_grid(64, 1.0)?;
    let gamma = DampingProfile::smoothed_for_grid(1.0, 0.0, 0.5, 2.0, &grid)?;
    let (s, m) = (1.5, 1.0);
    let data = InitialData::GaussianBump {
        center: 0.3,
        width: 0.2,
        amplitude: 1.0,
    };
    let (u0, v0) = data.build(&grid)?;
    let omega = (grid.max_abs_frequency().powf(s) + m).sqrt();
    let dt0 = 0.4 / omega;
    let run = |dt: f64| -> Result<State> {
        let cfg = SimConfig::new(s, m, gamma.clone(), grid.clone(), dt, 1.0, data.clone())?;
        evolve(&cfg, &u0, &v0, |_, _, _| {})
    };
    let reference = run(dt0 / 16.0)?;
    let mut errors = Vec::new();
    for div in [1.0, 2.0, 4.0] {
        let st = run(dt0 / div)?;
        errors.push(energy_weighted(&st.sub(&reference)?, s, m, EnergyWeight::Sobolev));
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((errors, orders))
}

pub fn criterion_hygiene() -> CheckResult {
    let run = || -> Result<Outcome> {
        let mut parts = Parts::default();
        // conservation over 1e4 steps
        let grid = make_grid(128, 1.0)?;
        let (s, m) = (1.5, 1.0);
        let omega = (grid.max_abs_frequency().powf(s) + m).sqrt();
        let dt = 0.25 / omega;
        let cfg = SimConfig::new(
            s,
            m,
            DampingProfile::zero(2.0)?,
            grid.clone(),
            dt,
            10_000.0 * dt,
            InitialData::RandomBandLimited { seed: 11, max_mode: 40 },
        )?
        .with_weight(EnergyWeight::Energy);
        let trace = simulate(&cfg)?;
        let e0 = trace.energy_norm[0];
        let drift = trace.energy_norm.iter().map(|e| rel(*e, e0)).fold(0.0, f64::max);
        parts.push(
            drift <= 1e-10 && cfg.steps() == 10_000,
            format!("undamped energy drift {drift:.3e} over {} steps", cfg.steps()),
        );
        let (errors, orders) = richardson_orders()?;
        parts.push(
            orders.iter().all(|o| (1.8..=2.2).contains(o)),
            format!(
                "Strang orders {:?} (errors {:?})",
                orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>(),
                errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()
            ),
        );
        let zero = DampingProfile::zero(2.0)?;
        let mut worst = 0.0f64;
        for s in [0.8, 1.0, 2.0, 3.0] {
            let ks = avoid_resonances(&geometric_grid(0.5, max_resolved_k(s, &grid).min(40.0), 4)?, s, 1.0, &grid);
            for k in ks {
                let norm = resolvent_norm(&assemble_helmholtz(s, 1.0, k, &zero, &grid)?, SpacePair::L2ToL2)?;
                let dist = grid
                    .frequencies()
                    .iter()
                    .map(|xi| (xi.abs().powf(s) + 1.0 - k * k).abs())
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max((norm * dist - 1.0).abs());
            }
        }
        parts.push(worst <= 1e-10, format!("undamped resolvent vs distance formula max rel err {worst:.3e}"));
        Ok(parts.outcome())
    };
    CheckResult::new(
        "9 numerics hygiene",
        "undamped flow conserves energy; Strang splitting is second order; undamped resolvent is diagonal",
        "drift <= 1e-10; observed order in [1.8, 2.2]; distance formula to 1e-10",
        "as stated",
        run(),
    )
}

pub struct Criterion {
    pub id: u32,
    pub run: fn() -> CheckResult,
}

pub fn acceptance_criteria() -> Vec<Criterion> {
    let list: [fn() -> CheckResult; 9] = [
        criterion_resolvent_l2,
        criterion_resolvent_energy,
        criterion_polynomial_decay,
        criterion_exponential_decay,
        criterion_observability,
        criterion_elementary,
        criterion_shift_and_periodization,
        criterion_exact_identities,
        criterion_hygiene,
    ];
    list.into_iter()
        .enumerate()
        .map(|(i, run)| Criterion { id: i as u32 + 1, run })
        .collect()
}

pub fn run_acceptance() -> Vec<CheckResult> {
    acceptance_criteria().iter().map(|c| (c.run)()).collect()
}

// ---------------------------------------------------------------------------
// invariants

fn invariant(name: &str, claim: &str, tolerance: &str, body: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    CheckResult::new(name, claim, "holds", tolerance, body().map(|(p, m)| Outcome::new(p, m)))
}

fn spectral_invariants(out: &mut Vec<CheckResult>) {
    out.push(invariant("spectral round trip", "values -> coeffs -> values is the identity", "1e-12", || {
        let grid = make_grid(128, 1.3)?;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let values: Vec<c64> = (0..128).map(|_| c64::new(rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let back = grid.inverse(&grid.forward(&values));
            let err: f64 = back.iter().zip(&values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let nrm: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(err / nrm);
        }
        Ok((worst <= 1e-12, format!("max rel err {worst:.3e}")))
    }));
    out.push(invariant("spectral Parseval", "h sum |f_j|^2 = 2L sum |c_k|^2", "1e-12", || {
        let grid = make_grid(96, 2.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_coeffs(&grid, &mut rng, None);
        let spectral = f.inner_spectral(&f)?.re.sqrt();
        let err = rel(f.l2_norm(), spectral);
        Ok((err <= 1e-12, format!("rel err {err:.3e}")))
    }));
    out.push(invariant("fractional Laplacian self-adjoint", "<A_s f, g> = <f, A_s g>", "1e-10", || {
        let grid = make_grid(64, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst = 0.0f64;
        for s in [0.5, 1.0, 1.7, 3.0] {
            let f = random_coeffs(&grid, &mut rng, Some(20));
            let g = random_coeffs(&grid, &mut rng, Some(20));
            let a = frac_laplacian_apply(&f, s)?.inner(&g)?;
            let b = f.inner(&frac_laplacian_apply(&g, s)?)?;
            worst = worst.max((a - b).norm() / a.norm().max(1e-300));
        }
        Ok((worst <= 1e-10, format!("max rel err {worst:.3e}")))
    }));
    out.push(invariant("fractional Laplacian nonnegative", "<A_s f, f> >= 0 on real fields", "-1e-12", || {
        let grid = make_grid(64, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut least = f64::INFINITY;
        for s in [0.3, 1.0, 2.5] {
            for _ in 0..5 {
                let f = random_real_field(&grid, &mut rng, 30);
                least = least.min(frac_laplacian_apply(&f, s)?.inner(&f)?.re);
            }
        }
        Ok((least >= -1e-12, format!("min form {least:.3e}")))
    }));
    out.push(invariant("multiplier semigroup", "A_{s1} A_{s2} = A_{s1+s2}", "1e-10", || {
        let grid = make_grid(64, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_coeffs(&grid, &mut rng, Some(12));
        let a = frac_laplacian_apply(&frac_laplacian_apply(&f, 0.7)?, 1.1)?;
        let b = frac_laplacian_apply(&f, 1.8)?;
        let err = a.sub(&b)?.l2_norm() / b.l2_norm();
        Ok((err <= 1e-10, format!("rel err {err:.3e}")))
    }));
    out.push(invariant("order-2 multiplier is -d^2/dx^2", "A_2 f = -f'' on trigonometric polynomials", "1e-10", || {
        let grid = make_grid(64, 1.0)?;
        let f = SpectralField::from_real_fn(&grid, |x| (PI * x).sin() + 0.5 * (3.0 * PI * x).cos() - 0.2 * (7.0 * PI * x).sin());
        let exact = SpectralField::from_real_fn(&grid, |x| {
            PI * PI * (PI * x).sin() + 4.5 * PI * PI * (3.0 * PI * x).cos() - 9.8 * PI * PI * (7.0 * PI * x).sin()
        });
        let err = frac_laplacian_apply(&f, 2.0)?.sub(&exact)?.l2_norm() / exact.l2_norm();
        Ok((err <= 1e-10, format!("rel err {err:.3e}")))
    }));
}

fn observability_invariants(out: &mut Vec<CheckResult>) {
    out.push(invariant("elementary constants bracket s", "d_s <= s <= D_s", "exact", || {
        let mut ok = true;
        for i in 1..=30 {
            let s = 0.1 * i as f64;
            let (d, dd) = elementary_constants(s, 1000)?;
            ok &= d <= s && s <= dd && d > 0.0;
        }
        Ok((ok, "s in {0.1, ..., 3.0}".into()))
    }));
    out.push(invariant("observability monotone in delta", "C_q non-increasing in delta", "1e-10", || {
        let mut ok = true;
        for (s, lambda) in [(1.0, 7.5 * PI), (2.0, 50.0), (1.5, 200.0)] {
            let n = ObservabilityQuery::required_modes(s, lambda).max(64);
            let mut last = f64::INFINITY;
            for delta in [0.05, 0.1, 0.3, 0.6, 1.0] {
                let c = observability_constant(&ObservabilityQuery::new(s, lambda, delta, n)?)?;
                ok &= c <= last * (1.0 + 1e-10);
                last = c;
            }
        }
        Ok((ok, "three (s, lambda) pairs, five windows".into()))
    }));
    out.push(invariant("whole-torus window", "C_q <= 1 when delta = 1", "1e-12", || {
        let mut worst = 0.0f64;
        for (s, lambda) in [(1.0, 3.0), (2.0, PI * PI), (0.7, -4.0), (3.0, 1000.0)] {
            let n = ObservabilityQuery::required_modes(s, lambda).max(32);
            worst = worst.max(observability_constant(&ObservabilityQuery::new(s, lambda, 1.0, n)?)?);
        }
        Ok((worst <= 1.0 + 1e-12, format!("max C_q {worst:.6}")))
    }));
    out.push(invariant("negative lambda without control", "sup ||u||/||f|| <= 1/|lambda| for lambda < 0", "exact", || {
        let mut ok = true;
        for s in [0.5, 1.0, 2.0] {
            for lambda in [-0.5, -3.0, -40.0] {
                let n = ObservabilityQuery::required_modes(s, lambda).max(64);
                ok &= no_control_constant(s, lambda, n)? <= 1.0 / lambda.abs();
            }
        }
        Ok((ok, "s in {0.5, 1, 2}, lambda in {-0.5, -3, -40}".into()))
    }));
    out.push(invariant("shifted group conjugation", "e^{itH_alpha} = e^{i alpha x} e^{itH_0} e^{-i alpha x}", "1e-10", || {
        let grid = make_grid(64, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_coeffs(&grid, &mut rng, Some(12));
        let mut worst = 0.0f64;
        for s in [0.5, 1.4, 2.0] {
            for j in [1.0, 4.0] {
                let op = ShiftedOperator::new(j * PI, s, &grid)?;
                let r = shifted_group_residual(&op, 1.9, &f)?;
                worst = worst.max(r.residual).max(r.unitarity_defect);
            }
        }
        Ok((worst <= 1e-10, format!("max residual {worst:.3e}")))
    }));
    out.push(invariant("periodization identity", "||g||^2 = c int ||Pi_alpha g||^2 d alpha", "1e-6", || {
        let grid = make_grid(128, 1.0)?;
        let mut worst = 0.0f64;
        for g in [LineFunction::gaussian(0.6)?, LineFunction::bump(0.7)?] {
            worst = worst.max(check_periodization_identity(&g, 64, &grid)?.residual);
        }
        Ok((worst <= 1e-6, format!("max residual {worst:.3e}")))
    }));
}

fn resolvent_invariants(out: &mut Vec<CheckResult>) {
    let grid = make_grid(64, 1.0).expect("valid grid");
    out.push(invariant("Helmholtz residual", "op u = f for solve outputs (50 draws)", "1e-9", || {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let gamma = scan_damping(&grid)?;
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let k = rng.gen_range(-30.0..30.0);
            let op = assemble_helmholtz(2.0, 1.0, k, &gamma, &grid)?;
            let f = random_coeffs(&grid, &mut rng, None);
            let u = solve_resolvent(&op, &f)?;
            worst = worst.max(op.apply(&u)?.sub(&f)?.l2_norm() / f.l2_norm());
        }
        Ok((worst <= 1e-9, format!("max residual {worst:.3e}")))
    }));
    out.push(invariant("adjoint symmetry", "<R(ik) f, g> = <f, R(-ik) g>", "1e-9", || {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let (s, m, k, gamma) = random_instance(&mut rng, &grid)?;
            let f = random_coeffs(&grid, &mut rng, None);
            let g = random_coeffs(&grid, &mut rng, None);
            let u = solve_resolvent(&assemble_helmholtz(s, m, k, &gamma, &grid)?, &f)?;
            let v = solve_resolvent(&assemble_helmholtz(s, m, -k, &gamma, &grid)?, &g)?;
            worst = worst.max((u.inner(&g)? - f.inner(&v)?).norm() / (u.l2_norm() * g.l2_norm()));
        }
        Ok((worst <= 1e-9, format!("max err {worst:.3e}")))
    }));
    out.push(invariant("imaginary-part identity", "Im<f, u> = k ||sqrt(gamma) u||^2", "1e-8", || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let (s, m, k, gamma) = random_instance(&mut rng, &grid)?;
            let f = random_coeffs(&grid, &mut rng, None);
            let u = solve_resolvent(&assemble_helmholtz(s, m, k, &gamma, &grid)?, &f)?;
            let rhs = k * multiply_pointwise(&u, &gamma)?.inner(&u)?.re;
            worst = worst.max(rel(f.inner(&u)?.im, rhs));
        }
        Ok((worst <= 1e-8, format!("max rel err {worst:.3e}")))
    }));
    out.push(invariant(
        "small-k coercivity",
        "||u||_{H^{s/2}} <= C ||f|| uniformly for |k| <= sqrt(m)/2",
        "coercivity constant",
        || {
            let mut ok = true;
            let mut worst = 0.0f64;
            for (s, m) in [(1.0f64, 1.0f64), (2.0, 0.5), (3.0, 2.0)] {
                let gamma = scan_damping(&grid)?;
                // Re<f,u> >= min(1, 3m/4) 2^{-max(0, s/2-1)} ||u||^2_{H^{s/2}}
                let bound = 2f64.powf((s / 2.0 - 1.0).max(0.0)) / (0.75 * m).min(1.0);
                for i in 0..=8 {
                    let k = m.sqrt() / 2.0 * i as f64 / 8.0;
                    let norm = resolvent_norm(&assemble_helmholtz(s, m, k, &gamma, &grid)?, SpacePair::L2ToHs2)?;
                    worst = worst.max(norm / bound);
                    ok &= norm <= bound;
                }
            }
            Ok((ok, format!("max norm / bound {worst:.4}")))
        },
    ));
    out.push(invariant(
        "Helmholtz algebraic identity",
        "R(ik) ik(gamma + ik) f - f = -R(ik)(A_s + m) f",
        "1e-9",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let (s, m, k, gamma) = random_instance(&mut rng, &grid)?;
                let f = random_coeffs(&grid, &mut rng, Some(20));
                let op = assemble_helmholtz(s, m, k, &gamma, &grid)?;
                let ik = c64::new(0.0, k);
                let damped = multiply_pointwise(&f, &gamma)?.scale(ik).add(&f.scale(ik * ik))?;
                let lhs = solve_resolvent(&op, &damped)?.sub(&f)?;
                let elastic = frac_laplacian_apply(&f, s)?.add(&f.scale(c64::new(m, 0.0)))?;
                let rhs = solve_resolvent(&op, &elastic)?.scale(c64::new(-1.0, 0.0));
                worst = worst.max(lhs.sub(&rhs)?.l2_norm() / rhs.l2_norm());
            }
            Ok((worst <= 1e-9, format!("max rel err {worst:.3e}")))
        },
    ));
    out.push(invariant("power iteration cross-check", "power iteration on R*R matches the SVD norm", "1e-8", || {
        let gamma = scan_damping(&grid)?;
        let mut worst = 0.0f64;
        for (s, k) in [(2.0, 5.0), (1.0, 3.0), (3.0, 20.0)] {
            let op = assemble_helmholtz(s, 1.0, k, &gamma, &grid)?;
            for pair in [SpacePair::L2ToL2, SpacePair::L2ToHs2] {
                let a = resolvent_norm(&op, pair)?;
                let b = resolvent_norm_power(&op, pair, 1e-13)?;
                worst = worst.max(rel(b, a));
            }
        }
        Ok((worst <= 1e-8, format!("max rel diff {worst:.3e}")))
    }));
}

fn semigroup_invariants(out: &mut Vec<CheckResult>) {
    out.push(invariant("energy monotone under damping", "E(t_{n+1}) <= E(t_n)(1 + 1e-12)", "1e-12", || {
        let grid = make_grid(64, 1.0)?;
        let gamma = DampingProfile::indicator(1.5, 0.2, 0.3, 2.0)?;
        let omega = (grid.max_abs_frequency() + 1.0).sqrt();
        let cfg = SimConfig::new(1.0, 1.0, gamma, grid, 0.25 / omega, 20.0, InitialData::RandomBandLimited { seed: 3, max_mode: 20 })?
            .with_weight(EnergyWeight::Energy);
        let trace = simulate(&cfg)?;
        let worst = trace.energy_norm.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::NEG_INFINITY, f64::max);
        Ok((worst <= 1e-12, format!("max step growth {worst:.3e}")))
    }));
    out.push(invariant("rotation reversible", "A(dt) A(-dt) = identity", "1e-12", || {
        let grid = make_grid(64, 1.0)?;
        let (u, v) = InitialData::RandomBandLimited { seed: 4, max_mode: 25 }.build(&grid)?;
        let st = State::new(u, v, 0.0)?;
        let back = rotate(&rotate(&st, 1.3, 1.0, 0.7)?, 1.3, 1.0, -0.7)?;
        let err = energy_weighted(&back.sub(&st)?, 1.3, 1.0, EnergyWeight::Energy) / energy_weighted(&st, 1.3, 1.0, EnergyWeight::Energy);
        Ok((err <= 1e-12, format!("rel err {err:.3e}")))
    }));
    out.push(invariant("linearity", "simulate(a U0) = a simulate(U0)", "1e-10", || {
        let grid = make_grid(64, 1.0)?;
        let gamma = scan_damping(&grid)?;
        let data = InitialData::RandomBandLimited { seed: 5, max_mode: 20 };
        let omega = (grid.max_abs_frequency().powf(1.2) + 1.0).sqrt();
        let cfg = SimConfig::new(1.2, 1.0, gamma, grid.clone(), 0.25 / omega, 3.0, data.clone())?;
        let (u, v) = data.build(&grid)?;
        let a = evolve(&cfg, &u, &v, |_, _, _| {})?;
        let f = c64::new(3.7, 0.0);
        let b = evolve(&cfg, &u.scale(f), &v.scale(f), |_, _, _| {})?;
        let err = energy_weighted(&b.sub(&a.scale(3.7))?, 1.2, 1.0, EnergyWeight::Sobolev)
            / energy_weighted(&b, 1.2, 1.0, EnergyWeight::Sobolev);
        Ok((err <= 1e-10, format!("rel err {err:.3e}")))
    }));
    out.push(invariant("Strang second order", "error vs a fine reference drops ~4x per halving", "order in [1.8, 2.2]", || {
        let (_, orders) = richardson_orders()?;
        Ok((orders.iter().all(|o| (1.8..=2.2).contains(o)), format!("orders {orders:.3?}")))
    }));
    out.push(invariant("dissipation identity", "dE/dt = -int gamma |u_t|^2, residual O(dt^2)", "ratio in [3, 5]", || {
        let grid = make_grid(64, 1.0)?;
        let gamma = DampingProfile::indicator(1.0, 0.0, 0.5, 2.0)?;
        let data = InitialData::GaussianBump { center: 0.3, width: 0.15, amplitude: 1.0 };
        let mut residuals = Vec::new();
        for dt in [0.004, 0.002] {
            let cfg = SimConfig::new(1.0, 1.0, gamma.clone(), grid.clone(), dt, 1.0, data.clone())?;
            residuals.push(dissipation_residual(&simulate_states(&cfg)?, 1.0, 1.0, &gamma)?);
        }
        let ratio = residuals[0] / residuals[1];
        Ok(((3.0..=5.0).contains(&ratio), format!("residuals {:.3e} {:.3e}, ratio {ratio:.3}", residuals[0], residuals[1])))
    }));
}

fn rate_invariants(out: &mut Vec<CheckResult>) {
    out.push(invariant("exponent algebra", "energy exponent - L2 exponent = 1", "1e-12", || {
        let mut worst = 0.0f64;
        for i in 1..=40 {
            let p = rates::predicted_decay(0.1 * i as f64)?;
            worst = worst.max((p.resolvent_exponent_energy - p.resolvent_exponent_l2 - 1.0).abs());
        }
        Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
    }));
    out.push(invariant("fit scale equivariance", "rescaling data changes only the intercept", "1e-12", || {
        let xs: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-0.7) * (1.0 + 0.1 * x.sin())).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| 42.0 * y).collect();
        let a = fit_power_law(&xs, &ys, 0.5)?;
        let b = fit_power_law(&xs, &scaled, 0.5)?;
        let c = fit_exponential(&xs, &ys, 0.5)?;
        let d = fit_exponential(&xs, &scaled, 0.5)?;
        let err = (a.slope - b.slope).abs().max((c.slope - d.slope).abs());
        Ok((err <= 1e-12, format!("slope change {err:.3e}")))
    }));
    out.push(invariant("regime threshold", "bt_alpha -> 0+ as s -> 2-", "monotone", || {
        let mut ok = true;
        let mut last = f64::INFINITY;
        for i in 1..=10 {
            let p = rates::predicted_decay(2.0 - 10f64.powi(-i))?;
            let a = p.bt_alpha.unwrap_or(f64::NAN);
            ok &= a > 0.0 && a < last;
            last = a;
        }
        ok &= rates::predicted_decay(2.0)?.regime == rates::DecayRegime::Exponential;
        Ok((ok, format!("bt_alpha at s = 2 - 1e-10: {last:.3e}")))
    }));
    out.push(invariant("bound check direction", "exact power law is stabilized; steeper growth is flagged", "factor 1.1", || {
        let xs: Vec<f64> = (0..40).map(|i| 10f64.powf(i as f64 / 16.0)).collect();
        let exact: Vec<f64> = xs.iter().map(|x| x.powf(1.3)).collect();
        let steep: Vec<f64> = xs.iter().map(|x| x.powf(1.6)).collect();
        let a = check_upper_bound(&xs, &exact, 1.3, BoundKind::Growth)?;
        let b = check_upper_bound(&xs, &steep, 1.3, BoundKind::Growth)?;
        Ok((a.stabilized && !b.stabilized, format!("exact {:.3}, steep {:.3}", a.growth_factor(), b.growth_factor())))
    }));
}

/// Every module invariant at moderate size.
pub fn run_invariants() -> Vec<CheckResult> {
    let mut out = Vec::new();
    spectral_invariants(&mut out);
    observability_invariants(&mut out);
    resolvent_invariants(&mut out);
    semigroup_invariants(&mut out);
    rate_invariants(&mut out);
    out
}

/// Guard errors are reported through [`CheckResult::numerical_guard`].
pub fn any_guard(results: &[CheckResult]) -> bool {
    results.iter().any(|r| !r.pass && r.numerical_guard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn parts_combine_pass_and_guard_flags() {
        let mut parts = Parts::default();
        parts.push(true, "a".into());
        parts.push_result("b", Ok((true, "fine".into())));
        let o = parts.outcome();
        assert!(o.pass && !o.guard);
        assert_eq!(o.measured, "[ok] a; [ok] b: fine");

        let mut parts = Parts::default();
        parts.push(false, "plain".into());
        parts.push_result("c", Err(Error::UnderResolved("too coarse".into())));
        let o = parts.outcome();
        assert!(!o.pass && o.guard);

        let mut parts = Parts::default();
        parts.push_result("d", Err(Error::ZeroInput));
        assert!(!parts.outcome().guard);
    }

    #[test]
    fn error_outcomes_are_failures() {
        let r = CheckResult::new("x", "claim", "e", "t", Err(Error::NonFinite { step: 3 }));
        assert!(!r.pass && r.numerical_guard);
        assert!(r.line().starts_with("FAIL x: error:"));
        let json = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["expected", "measured", "name", "paper_ref", "pass", "tolerance"]);
        assert!(any_guard(&[r]));
    }

    #[test]
    fn invariant_suite_passes() {
        let results = run_invariants();
        assert!(results.len() >= 25);
        for r in &results {
            assert!(r.pass, "{}", r.line());
        }
    }

    #[test]
    fn criteria_are_numbered_in_order() {
        let ids: Vec<u32> = acceptance_criteria().iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=9).collect::<Vec<_>>());
    }

    #[test]
    fn lambda_grid_contains_the_eigenvalues() {
        let grid = observability_lambda_grid(1.0, 35);
        assert_eq!(grid.len(), 40);
        assert!(grid.windows(2).all(|w| w[0] <= w[1]));
        for k in [1.0, 2.0, 4.0, 8.0, 16.0] {
            assert!(grid.contains(&(PI * k)));
        }
        assert_eq!(grid[0], 1.0);
        assert!((grid[39] - 1e4).abs() < 1e-8);
    }
}
