use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dfkg_core::observability::{
    check_periodization_identity, periodize, scan_observability, LineFunction, ObservabilityQuery,
};
use dfkg_core::rates::{self, check_upper_bound, fit_envelope, fit_exponential, fit_power_law, BoundKind, DecayRegime};
use dfkg_core::resolvent::{avoid_resonances, geometric_grid, max_resolved_k, modes_required, scan_resolvent, SpacePair};
use dfkg_core::semigroup::{default_dt, simulate as run_simulation, InitialData, SimConfig};
use dfkg_core::verify::{acceptance_criteria, run_invariants, CheckResult};
use dfkg_core::{make_grid, DampingProfile, EnergyWeight, Grid};

use crate::config::{echo, ObservabilityParams, RateFitParams, ResolventParams, SimulateParams, VerifyParams};
use crate::output::{Cell, OutputDir, Table};
use crate::svg::{Plot, Series};
use crate::CliError;

fn damping_profile(kind: &str, amplitude: f64, center: f64, half_width: f64, ramp: f64, grid: &Grid) -> Result<DampingProfile, CliError> {
    let period = grid.period();
    Ok(match kind {
        "smoothed" if ramp > 0.0 => DampingProfile::smoothed_indicator(amplitude, center, half_width, ramp, period)?,
        "smoothed" => DampingProfile::smoothed_for_grid(amplitude, center, half_width, period, grid)?,
        "indicator" => DampingProfile::indicator(amplitude, center, half_width, period)?,
        "constant" => DampingProfile::constant(amplitude, period)?,
        "zero" => DampingProfile::zero(period)?,
        other => return Err(CliError::Config(format!("damping: unknown kind `{other}` (smoothed, indicator, constant, zero)"))),
    })
}

fn bracket(k: f64) -> f64 {
    (1.0 + k * k).sqrt()
}

pub fn simulate(p: &SimulateParams, out: &OutputDir) -> Result<Vec<CheckResult>, CliError> {
    let grid = make_grid(p.n_modes, p.half_period)?;
    let gamma = damping_profile(&p.damping, p.amplitude, p.center, p.half_width, p.ramp, &grid)?;
    let data = match p.data.as_str() {
        "random" => InitialData::RandomBandLimited { seed: p.seed, max_mode: p.max_mode },
        "modal" => InitialData::Modal { k: p.mode, amplitude: p.data_amplitude },
        "gaussian" => InitialData::GaussianBump { center: p.center, width: p.width, amplitude: p.data_amplitude },
        other => return Err(CliError::Config(format!("data: unknown kind `{other}` (random, modal, gaussian)"))),
    };
    let weight = match p.weight.as_str() {
        "sobolev" => EnergyWeight::Sobolev,
        "energy" => EnergyWeight::Energy,
        other => return Err(CliError::Config(format!("weight: unknown weight `{other}` (sobolev, energy)"))),
    };
    let dt = if p.dt > 0.0 { p.dt } else { default_dt(p.s, p.m, &grid) };
    let cfg = SimConfig::new(p.s, p.m, gamma, grid, dt, p.t_final, data)?.with_weight(weight);
    if !(p.record_every > 0.0) {
        return Err(CliError::Config("record_every: must be positive".into()));
    }
    let stride = ((p.record_every / cfg.step_size()).round() as usize).max(1);
    let cfg = cfg.with_record_stride(stride)?;
    let trace = run_simulation(&cfg)?;

    let mut table = Table::new("simulate", echo(p), vec!["t", "energy_norm", "l2_norm_u", "l2_norm_v"]);
    for i in 0..trace.times.len() {
        table.push(vec![
            Cell::Num(trace.times[i]),
            Cell::Num(trace.energy_norm[i]),
            Cell::Num(trace.l2_u[i]),
            Cell::Num(trace.l2_v[i]),
        ]);
    }
    table.trailer(format!("data_norm = {:.16e}", trace.data_norm));
    table.trailer(format!("steps = {}, dt = {:.16e}, record_stride = {stride}", cfg.steps(), cfg.step_size()));

    let normalized = trace.normalized();
    let window: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&normalized)
        .filter(|(t, _)| **t >= p.fit_start && **t > 0.0)
        .map(|(t, e)| (*t, *e))
        .collect();
    let ts: Vec<f64> = window.iter().map(|w| w.0).collect();
    let vs: Vec<f64> = window.iter().map(|w| w.1).collect();
    let prediction = rates::predicted_decay(p.s)?;
    let mut series = vec![Series::line("E(t) / data norm", trace.times.iter().cloned().zip(normalized.iter().cloned()).collect())];
    let check = match prediction.regime {
        DecayRegime::Polynomial => {
            let exponent = prediction.poly_exponent.unwrap_or(f64::NAN);
            let fit = fit_power_law(&ts, &vs, p.tail_fraction)?;
            let bound = check_upper_bound(&ts, &vs, exponent, BoundKind::Decay)?;
            series.push(Series::dashed(
                format!("C t^-{exponent:.3}"),
                ts.iter().map(|t| (*t, bound.sup_ratio * t.powf(-exponent))).collect(),
            ));
            CheckResult::evaluated(
                "simulate polynomial decay bound",
                "energy decays at least like t^{-s/(4-2s)} for 0<s<2",
                &format!("sup of t^{exponent:.6} E(t)/E_data stabilizes"),
                "tail sup <= 1.1 x head sup",
                format!(
                    "fitted exponent {:.6} (r2 {:.6}), sup ratio {:.6e}, tail/head {:.4}",
                    -fit.slope,
                    fit.r_squared,
                    bound.sup_ratio,
                    bound.growth_factor()
                ),
                bound.stabilized,
            )
        }
        DecayRegime::Exponential => {
            let fit = fit_envelope(&ts, &vs, p.tail_fraction)?;
            series.push(Series::dashed(
                format!("fit e^-{:.3} t", fit.rate()),
                ts.iter().map(|t| (*t, (fit.intercept + fit.slope * t).exp())).collect(),
            ));
            CheckResult::evaluated(
                "simulate exponential decay",
                "energy decays exponentially for s>=2",
                "envelope rate > 0 with r^2 >= 0.99",
                "r^2 >= 0.99",
                format!("rate {:.6e}, r2 {:.6}", fit.rate(), fit.r_squared),
                fit.rate() > 0.0 && fit.r_squared >= 0.99,
            )
        }
    };
    out.write("simulate.csv", &table.render())?;
    let plot = Plot {
        title: format!("energy decay, s = {}", p.s),
        x_label: "t".into(),
        y_label: "normalized energy norm".into(),
        log_x: prediction.regime == DecayRegime::Polynomial,
        log_y: true,
        series,
    };
    out.write("simulate.svg", &plot.render())?;
    Ok(vec![check])
}

pub fn resolvent_scan(p: &ResolventParams, out: &OutputDir) -> Result<Vec<CheckResult>, CliError> {
    let pair = SpacePair::parse(&p.pair)
        .ok_or_else(|| CliError::Config(format!("pair: unknown pair `{}` (L2->L2, L2->Hs2, Hneg->L2, energy)", p.pair)))?;
    let n_modes = if p.n_modes > 0 {
        p.n_modes
    } else {
        let need = modes_required(p.s, p.k_max, p.half_period);
        let need = need + need % 2;
        if need > p.max_modes {
            let reach = max_resolved_k(p.s, &make_grid(p.max_modes - p.max_modes % 2, p.half_period)?);
            return Err(CliError::Guard(format!(
                "k_max = {} needs n_modes >= {need}, above max_modes = {}; at that size k is resolved up to {reach:.4}",
                p.k_max, p.max_modes
            )));
        }
        need.max(16)
    };
    let grid = make_grid(n_modes, p.half_period)?;
    let gamma = damping_profile(&p.damping, p.amplitude, p.center, p.half_width, p.ramp, &grid)?;
    let mut ks = geometric_grid(p.k_min, p.k_max, p.per_decade)?;
    if gamma.is_zero() {
        ks = avoid_resonances(&ks, p.s, p.m, &grid);
    }
    let scan = scan_resolvent(p.s, p.m, &gamma, &grid, &ks, pair)?;
    let ratios = scan.normalized_ratios();
    let mut config = echo(p);
    config.push(format!("resolved_n_modes = {n_modes}"));
    let mut table = Table::new(
        "resolvent-scan",
        config,
        vec!["s", "m", "k", "pair", "norm", "paper_exponent", "normalized_ratio"],
    );
    for i in 0..ks.len() {
        table.push(vec![
            Cell::Num(p.s),
            Cell::Num(p.m),
            Cell::Num(ks[i]),
            Cell::Text(pair.label().into()),
            Cell::Num(scan.norms[i]),
            Cell::Num(scan.bound_exponent),
            Cell::Num(ratios[i]),
        ]);
    }
    let slope = scan.fitted_slope.map_or("n/a".to_string(), |v| format!("{v:.16e}"));
    table.trailer(format!(
        "summary: sup_ratio = {:.16e}, head_sup = {:.16e}, tail_sup = {:.16e}, stabilized = {}, paper_exponent = {:.16e}, fitted_slope = {slope}",
        scan.bound.sup_ratio, scan.bound.head_sup, scan.bound.tail_sup, scan.bound.stabilized, scan.bound_exponent
    ));
    out.write("resolvent_scan.csv", &table.render())?;
    let plot = Plot {
        title: format!("resolvent norm {}, s = {}", pair.label(), p.s),
        x_label: "k".into(),
        y_label: "norm".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series::line("norm", ks.iter().cloned().zip(scan.norms.iter().cloned()).collect()),
            Series::dashed(
                format!("C <k>^{:.3}", scan.bound_exponent),
                ks.iter().map(|k| (*k, scan.bound.sup_ratio * bracket(*k).powf(scan.bound_exponent))).collect(),
            ),
        ],
    };
    out.write("resolvent_scan.svg", &plot.render())?;
    Ok(vec![CheckResult::evaluated(
        &format!("resolvent {} bound", pair.label()),
        "resolvent norm grows at most like <k>^exponent",
        &format!("sup of norm / <k>^{:.6} stabilizes", scan.bound_exponent),
        "tail sup <= 1.1 x head sup",
        format!(
            "sup ratio {:.6e}, tail/head {:.4}, fitted slope {}",
            scan.bound.sup_ratio,
            scan.bound.growth_factor(),
            scan.fitted_slope.map_or("n/a".to_string(), |v| format!("{v:.4}"))
        ),
        scan.bound.stabilized,
    )])
}

pub fn observability_scan(p: &ObservabilityParams, out: &OutputDir) -> Result<Vec<CheckResult>, CliError> {
    if !(p.lambda_min > 0.0 && p.lambda_max > p.lambda_min && p.points >= 2) {
        return Err(CliError::Config("lambda range: need 0 < lambda_min < lambda_max and points >= 2".into()));
    }
    let ratio = (p.lambda_max / p.lambda_min).ln();
    let mut lambdas: Vec<f64> = (0..p.points)
        .map(|i| p.lambda_min * (ratio * i as f64 / (p.points - 1) as f64).exp())
        .collect();
    if p.include_eigenvalues {
        lambdas.extend(
            (1..)
                .map(|k| (PI * k as f64).powf(p.s))
                .skip_while(|l| *l < p.lambda_min)
                .take_while(|l| *l <= p.lambda_max),
        );
    }
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lambdas.dedup();
    let n_modes = if p.n_modes > 0 { p.n_modes } else { ObservabilityQuery::required_modes(p.s, p.lambda_max) };
    let scan = scan_observability(p.s, p.delta, &lambdas, n_modes)?;

    let mut table = Table::new("observability-scan", echo(p), vec!["s", "lambda", "delta", "n_modes", "C_q"]);
    for (lambda, c) in &scan {
        table.push(vec![Cell::Num(p.s), Cell::Num(*lambda), Cell::Num(p.delta), Cell::Int(n_modes as i64), Cell::Num(*c)]);
    }
    let (arg, max) = scan.iter().cloned().fold((f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    table.trailer(format!("summary: max C_q = {max:.16e} at lambda = {arg:.16e}"));
    out.write("observability_scan.csv", &table.render())?;
    let plot = Plot {
        title: format!("observability constant, s = {}, delta = {}", p.s, p.delta),
        x_label: "lambda".into(),
        y_label: "C_q".into(),
        log_x: true,
        log_y: false,
        series: vec![Series::line("C_q", scan.clone())],
    };
    out.write("observability_scan.svg", &plot.render())?;
    let mut checks = vec![CheckResult::evaluated(
        "observability constant",
        "||u|| <= C (<lambda>^{1/s-1} ||f|| + ||u||_window) uniformly in lambda",
        "C_q finite over the scan",
        "finite",
        format!("max C_q {max:.6} at lambda {arg:.4}, n_modes {n_modes}"),
        max.is_finite(),
    )];

    if p.periodization {
        let grid = make_grid(128, 1.0)?;
        let g = LineFunction::gaussian(p.gaussian_width)?;
        let mut table = Table::new("observability-scan", echo(p), vec!["alpha", "torus_norm_sq"]);
        let width = grid.frequency_spacing();
        let mut points = Vec::new();
        for j in 0..p.n_alpha {
            let alpha = width * j as f64 / p.n_alpha as f64;
            let norm_sq = periodize(&g, alpha, &grid)?.l2_norm().powi(2);
            table.push(vec![Cell::Num(alpha), Cell::Num(norm_sq)]);
            points.push((alpha, norm_sq));
        }
        let identity = check_periodization_identity(&g, p.n_alpha, &grid)?;
        table.trailer(format!(
            "summary: line_norm_sq = {:.16e}, torus_integral = {:.16e}, residual = {:.16e}",
            identity.line_norm_sq, identity.torus_integral, identity.residual
        ));
        out.write("periodization.csv", &table.render())?;
        let plot = Plot {
            title: format!("periodized Gaussian, width {}", p.gaussian_width),
            x_label: "alpha".into(),
            y_label: "torus norm squared".into(),
            log_x: false,
            log_y: false,
            series: vec![Series::line("||Pi_alpha g||^2", points)],
        };
        out.write("periodization.svg", &plot.render())?;
        checks.push(CheckResult::evaluated(
            "periodization identity",
            "||g||^2 on the line equals the normalized alpha-integral of torus norms",
            "residual below tolerance",
            "1e-6",
            format!("residual {:.3e}", identity.residual),
            identity.residual <= 1e-6,
        ));
    }
    Ok(checks)
}

fn read_columns(path: &Path, x_column: &str, y_column: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let err = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| err(format!("no column `{name}` (have {})", headers.iter().collect::<Vec<_>>().join(", "))))
    };
    let (xi, yi) = (find(x_column)?, find(y_column)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(format!("row {}: column {i} is not a number", line + 1)))
        };
        xs.push(parse(xi)?);
        ys.push(parse(yi)?);
    }
    Ok((xs, ys))
}

pub fn rate_fit(p: &RateFitParams) -> Result<Vec<CheckResult>, CliError> {
    if p.input.is_empty() {
        return Err(CliError::Config("input: a CSV file is required".into()));
    }
    let (xs, ys) = read_columns(Path::new(&p.input), &p.x_column, &p.y_column)?;
    let keep: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] >= p.x_min && xs[i] > 0.0).collect();
    let xs: Vec<f64> = keep.iter().map(|&i| xs[i]).collect();
    let ys: Vec<f64> = keep.iter().map(|&i| ys[i]).collect();
    let fit = match p.model.as_str() {
        "power" => fit_power_law(&xs, &ys, p.tail_fraction)?,
        "exponential" => fit_exponential(&xs, &ys, p.tail_fraction)?,
        "envelope" => fit_envelope(&xs, &ys, p.tail_fraction)?,
        other => return Err(CliError::Config(format!("model: unknown model `{other}` (power, exponential, envelope)"))),
    };
    let mut checks = vec![CheckResult::evaluated(
        &format!("{} fit of {} against {}", p.model, p.y_column, p.x_column),
        "least-squares fit on the tail of the trace",
        "finite fit",
        &format!("tail fraction {}", p.tail_fraction),
        format!(
            "slope {:.16e}, intercept {:.16e}, r2 {:.6}, points {}",
            fit.slope, fit.intercept, fit.r_squared, fit.points_used
        ),
        fit.slope.is_finite() && fit.r_squared.is_finite(),
    )];
    if p.check {
        let kind = match p.kind.as_str() {
            "growth" => BoundKind::Growth,
            "decay" => BoundKind::Decay,
            other => return Err(CliError::Config(format!("kind: unknown kind `{other}` (growth, decay)"))),
        };
        let bound = check_upper_bound(&xs, &ys, p.bound_exponent, kind)?;
        checks.push(CheckResult::evaluated(
            &format!("{} bound with exponent {}", p.kind, p.bound_exponent),
            "upper bound with the stated exponent",
            "normalized supremum stabilizes",
            "tail sup <= 1.1 x head sup",
            format!("sup ratio {:.6e}, tail/head {:.4}", bound.sup_ratio, bound.growth_factor()),
            bound.stabilized,
        ));
    }
    Ok(checks)
}

pub fn verify(p: &VerifyParams) -> Result<Vec<CheckResult>, CliError> {
    let selected: Vec<u32> = p
        .criteria
        .split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(|c| c.parse().map_err(|_| CliError::Config(format!("criteria: `{c}` is not a criterion number"))))
        .collect::<Result<_, _>>()?;
    match p.suite.as_str() {
        "invariants" => Ok(run_invariants()),
        "acceptance" => {
            let criteria = acceptance_criteria();
            if let Some(bad) = selected.iter().find(|id| !criteria.iter().any(|c| c.id == **id)) {
                return Err(CliError::Config(format!("criteria: no criterion {bad}")));
            }
            Ok(criteria
                .iter()
                .filter(|c| selected.is_empty() || selected.contains(&c.id))
                .map(|c| (c.run)())
                .collect())
        }
        other => Err(CliError::Config(format!("suite: unknown suite `{other}` (invariants, acceptance)"))),
    }
}

pub fn report(inputs: &[PathBuf], out: &OutputDir) -> Result<Vec<CheckResult>, CliError> {
    let inputs = if inputs.is_empty() { vec![out.path("")] } else { inputs.to_vec() };
    let mut all = Vec::new();
    for input in &inputs {
        all.extend(crate::output::read_summary(input)?);
    }
    let mut md = String::from("| check | expected | measured | tolerance | result |\n|---|---|---|---|---|\n");
    for c in &all {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            c.name.replace('|', "\\|"),
            c.expected.replace('|', "\\|"),
            c.measured.replace('|', "\\|"),
            c.tolerance.replace('|', "\\|"),
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    let passed = all.iter().filter(|c| c.pass).count();
    md.push_str(&format!("\n{passed} of {} checks passed\n", all.len()));
    out.write("report.md", &md)?;
    print!("{md}");
    Ok(all)
}
