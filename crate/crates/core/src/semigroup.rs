//! Time evolution of `u_tt + gamma u_t + (-d^2/dx^2)^{s/2} u + m u = 0` by
//! Strang splitting with exact sub-flows: the undamped modal rotation and the
//! pointwise damping `v <- e^{-gamma t} v`.

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::spectral::{check_order, sobolev_norm, EnergyWeight, Grid, SobolevOrder, SpectralField};

/// Default accuracy guard on `dt * omega_max`.
pub const DEFAULT_STABILITY_BOUND: f64 = 0.5;

/// `U = (u, u_t)` at time `t`.
#[derive(Clone, Debug)]
pub struct State {
    pub u: SpectralField,
    pub v: SpectralField,
    pub t: f64,
}

impl State {
    pub fn new(u: SpectralField, v: SpectralField, t: f64) -> Result<Self> {
        u.grid().ensure_same(v.grid())?;
        Ok(Self { u, v, t })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            u: SpectralField::zeros(grid),
            v: SpectralField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let f = c64::new(factor, 0.0);
        Self {
            u: self.u.scale(f),
            v: self.v.scale(f),
            t: self.t,
        }
    }

    pub fn sub(&self, other: &State) -> Result<State> {
        State::new(self.u.sub(&other.u)?, self.v.sub(&other.v)?, self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `u = amplitude cos(pi k x / L)`, `v = 0`.
    Modal { k: i64, amplitude: f64 },
    /// `u = amplitude exp(-d^2 / (2 width^2))`, `d` the periodic distance to
    /// `center`; `v = 0`.
    GaussianBump { center: f64, width: f64, amplitude: f64 },
    /// Real `u` and `v` with seeded uniform coefficients on `|j| <= max_mode`.
    RandomBandLimited { seed: u64, max_mode: i64 },
}

impl InitialData {
    pub fn build(&self, grid: &Grid) -> Result<(SpectralField, SpectralField)> {
        let l = grid.half_period();
        match *self {
            InitialData::Modal { k, amplitude } => {
                if grid.slot(k).is_none() || 2 * k.unsigned_abs() as usize >= grid.n_modes() {
                    return Err(Error::param("k", format!("mode {k} not resolved")));
                }
                let u = SpectralField::from_real_fn(grid, |x| {
                    amplitude * (std::f64::consts::PI * k as f64 * x / l).cos()
                });
                Ok((u, SpectralField::zeros(grid)))
            }
            InitialData::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                if !(width > 0.0 && width.is_finite()) {
                    return Err(Error::param("width", "must be positive"));
                }
                let p = grid.period();
                let u = SpectralField::from_real_fn(grid, |x| {
                    let d = x - center;
                    let d = d - p * (d / p).round();
                    amplitude * (-d * d / (2.0 * width * width)).exp()
                });
                Ok((u, SpectralField::zeros(grid)))
            }
            InitialData::RandomBandLimited { seed, max_mode } => {
                if max_mode < 0 || 2 * max_mode as usize >= grid.n_modes() {
                    return Err(Error::param(
                        "max_mode",
                        format!("band {max_mode} not below the Nyquist mode"),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut draw = |grid: &Grid| {
                    let mut coeffs = vec![c64::new(0.0, 0.0); grid.n_modes()];
                    coeffs[0] = c64::new(rng.gen_range(-0.5..0.5), 0.0);
                    for j in 1..=max_mode {
                        let c = c64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                        coeffs[grid.slot(j).unwrap()] = c;
                        coeffs[grid.slot(-j).unwrap()] = c.conj();
                    }
                    SpectralField::from_coeffs(grid, coeffs)
                };
                let u = draw(grid)?;
                let v = draw(grid)?;
                Ok((u, v))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub s: f64,
    pub m: f64,
    pub gamma: DampingProfile,
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    pub initial_data: InitialData,
    /// Weight of the recorded energy norm.
    pub weight: EnergyWeight,
    /// Guard on `dt * omega_max`.
    pub stability_bound: f64,
}

impl SimConfig {
    /// A config with `record_stride = 1`, Sobolev weight and the default
    /// guard; validated.
    pub fn new(
        s: f64,
        m: f64,
        gamma: DampingProfile,
        grid: Grid,
        dt: f64,
        t_final: f64,
        initial_data: InitialData,
    ) -> Result<Self> {
        let cfg = Self {
            s,
            m,
            gamma,
            grid,
            dt,
            t_final,
            record_stride: 1,
            initial_data,
            weight: EnergyWeight::Sobolev,
            stability_bound: DEFAULT_STABILITY_BOUND,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_record_stride(mut self, stride: usize) -> Result<Self> {
        self.record_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weight(mut self, weight: EnergyWeight) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.s)?;
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::param("m", "must be positive"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", "must be positive"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::param("t_final", "must be positive"));
        }
        if self.record_stride == 0 {
            return Err(Error::param("record_stride", "must be positive"));
        }
        self.gamma.check_grid(&self.grid)?;
        let guard = self.dt * self.omega_max();
        if guard > self.stability_bound {
            return Err(Error::param(
                "dt",
                format!(
                    "dt * omega_max = {guard:.4} exceeds the accuracy guard {}",
                    self.stability_bound
                ),
            ));
        }
        Ok(())
    }

    /// `sqrt(|xi_max|^s + m)`.
    pub fn omega_max(&self) -> f64 {
        (self.grid.max_abs_frequency().powf(self.s) + self.m).sqrt()
    }

    /// Number of steps: `ceil(t_final / dt)`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    /// Step actually taken so that `steps() * step_size() = t_final`.
    pub fn step_size(&self) -> f64 {
        self.t_final / self.steps() as f64
    }
}

/// `dt = 0.01 / omega_max`.
pub fn default_dt(s: f64, m: f64, grid: &Grid) -> f64 {
    0.01 / (grid.max_abs_frequency().powf(s) + m).sqrt()
}

/// Precomputed factors for repeated steps of one size.
struct Stepper {
    grid: Grid,
    omega: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    damping: Option<Vec<f64>>,
}

impl Stepper {
    fn new(s: f64, m: f64, gamma: &DampingProfile, grid: &Grid, dt: f64) -> Result<Self> {
        let omega: Vec<f64> = grid.frequencies().iter().map(|xi| (xi.abs().powf(s) + m).sqrt()).collect();
        let half = dt / 2.0;
        let damping = if gamma.is_zero() {
            None
        } else {
            Some(gamma.samples(grid)?.iter().map(|g| (-g * dt).exp()).collect())
        };
        Ok(Self {
            grid: grid.clone(),
            cos: omega.iter().map(|w| (w * half).cos()).collect(),
            sin: omega.iter().map(|w| (w * half).sin()).collect(),
            omega,
            damping,
        })
    }

    fn rotate(&self, u: &mut [c64], v: &mut [c64]) {
        for p in 0..u.len() {
            let (c, s, w) = (self.cos[p], self.sin[p], self.omega[p]);
            let (a, b) = (u[p], v[p]);
            u[p] = a * c + b * (s / w);
            v[p] = -a * (w * s) + b * c;
        }
    }

    fn step(&self, u: &mut [c64], v: &mut [c64], scratch: &mut Vec<c64>) {
        self.rotate(u, v);
        if let Some(factors) = &self.damping {
            scratch.clear();
            scratch.extend_from_slice(v);
            self.grid.inverse_in_place(scratch);
            for (x, f) in scratch.iter_mut().zip(factors) {
                *x *= f;
            }
            self.grid.forward_in_place(scratch);
            v.copy_from_slice(scratch);
        }
        self.rotate(u, v);
    }
}

/// Sub-flow A: the undamped rotation over time `tau` (any sign).
pub fn rotate(state: &State, s: f64, m: f64, tau: f64) -> Result<State> {
    check_order(s)?;
    let rot = |xi: f64| {
        let w = (xi.abs().powf(s) + m).sqrt();
        (w, (w * tau).cos(), (w * tau).sin())
    };
    let grid = state.grid();
    let (mut u, mut v) = (state.u.coeffs().to_vec(), state.v.coeffs().to_vec());
    for (p, &xi) in grid.frequencies().iter().enumerate() {
        let (w, c, sn) = rot(xi);
        let (a, b) = (u[p], v[p]);
        u[p] = a * c + b * (sn / w);
        v[p] = -a * (w * sn) + b * c;
    }
    State::new(
        SpectralField::from_coeffs(grid, u)?,
        SpectralField::from_coeffs(grid, v)?,
        state.t + tau,
    )
}

/// Sub-flow B: `v <- e^{-gamma tau} v` at the collocation points.
pub fn damp(state: &State, gamma: &DampingProfile, tau: f64) -> Result<State> {
    let samples = gamma.samples(state.grid())?;
    let values: Vec<c64> = state
        .v
        .values()
        .iter()
        .zip(&samples)
        .map(|(v, g)| v * (-g * tau).exp())
        .collect();
    State::new(state.u.clone(), SpectralField::from_values(state.grid(), values)?, state.t)
}

/// One Strang step `A(dt/2) B(dt) A(dt/2)` of size `cfg.dt`.
pub fn step_strang(state: &State, cfg: &SimConfig) -> Result<State> {
    cfg.grid.ensure_same(state.grid())?;
    let stepper = Stepper::new(cfg.s, cfg.m, &cfg.gamma, &cfg.grid, cfg.dt)?;
    let (mut u, mut v) = (state.u.coeffs().to_vec(), state.v.coeffs().to_vec());
    stepper.step(&mut u, &mut v, &mut Vec::new());
    State::new(
        SpectralField::from_coeffs(&cfg.grid, u)?,
        SpectralField::from_coeffs(&cfg.grid, v)?,
        state.t + cfg.dt,
    )
}

/// Energy-space norm `sqrt(||u||^2_{H^{s/2}} + ||v||^2_{L2})` with the
/// Sobolev weight.
pub fn energy(state: &State, s: f64, m: f64) -> f64 {
    energy_weighted(state, s, m, EnergyWeight::Sobolev)
}

pub fn energy_weighted(state: &State, s: f64, m: f64, weight: EnergyWeight) -> f64 {
    energy_from_coeffs(state.grid(), state.u.coeffs(), state.v.coeffs(), s, m, weight)
}

fn energy_from_coeffs(grid: &Grid, u: &[c64], v: &[c64], s: f64, m: f64, weight: EnergyWeight) -> f64 {
    let sum: f64 = grid
        .frequencies()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&xi, (a, b))| weight.squared(xi, s, m) * a.norm_sqr() + b.norm_sqr())
        .sum();
    (grid.period() * sum).sqrt()
}

/// Data norm `sqrt(||u||^2_{H^s} + ||v||^2_{H^{s/2}})`.
pub fn data_norm(u: &SpectralField, v: &SpectralField, s: f64) -> f64 {
    let a = sobolev_norm(u, SobolevOrder::new(s).unwrap_or(SobolevOrder::L2));
    let b = sobolev_norm(v, SobolevOrder::new(s / 2.0).unwrap_or(SobolevOrder::L2));
    a.hypot(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energy_norm: Vec<f64>,
    pub l2_u: Vec<f64>,
    pub l2_v: Vec<f64>,
    pub data_norm: f64,
    pub weight: EnergyWeight,
}

impl EnergyTrace {
    /// `energy_norm / data_norm`.
    pub fn normalized(&self) -> Vec<f64> {
        self.energy_norm.iter().map(|e| e / self.data_norm).collect()
    }
}

fn l2_from_coeffs(grid: &Grid, c: &[c64]) -> f64 {
    (grid.period() * c.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Runs `cfg` from `(u0, v0)`, calling `record` at `t = 0` and every
/// `record_stride` steps (and at the final step). Returns the final state.
pub fn evolve(
    cfg: &SimConfig,
    u0: &SpectralField,
    v0: &SpectralField,
    mut record: impl FnMut(f64, &[c64], &[c64]),
) -> Result<State> {
    cfg.validate()?;
    cfg.grid.ensure_same(u0.grid())?;
    cfg.grid.ensure_same(v0.grid())?;
    let steps = cfg.steps();
    let dt = cfg.step_size();
    let stepper = Stepper::new(cfg.s, cfg.m, &cfg.gamma, &cfg.grid, dt)?;
    let (mut u, mut v) = (u0.coeffs().to_vec(), v0.coeffs().to_vec());
    let mut scratch = Vec::with_capacity(u.len());
    record(0.0, &u, &v);
    for n in 1..=steps {
        stepper.step(&mut u, &mut v, &mut scratch);
        if !u.iter().chain(&v).all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite { step: n });
        }
        if n % cfg.record_stride == 0 || n == steps {
            record(n as f64 * dt, &u, &v);
        }
    }
    State::new(
        SpectralField::from_coeffs(&cfg.grid, u)?,
        SpectralField::from_coeffs(&cfg.grid, v)?,
        cfg.t_final,
    )
}

/// Energy trace of the configured run.
pub fn simulate(cfg: &SimConfig) -> Result<EnergyTrace> {
    let (u0, v0) = cfg.initial_data.build(&cfg.grid)?;
    simulate_from(cfg, &u0, &v0)
}

pub fn simulate_from(cfg: &SimConfig, u0: &SpectralField, v0: &SpectralField) -> Result<EnergyTrace> {
    let mut trace = EnergyTrace {
        times: Vec::new(),
        energy_norm: Vec::new(),
        l2_u: Vec::new(),
        l2_v: Vec::new(),
        data_norm: data_norm(u0, v0, cfg.s),
        weight: cfg.weight,
    };
    let grid = cfg.grid.clone();
    evolve(cfg, u0, v0, |t, u, v| {
        trace.times.push(t);
        trace.energy_norm.push(energy_from_coeffs(&grid, u, v, cfg.s, cfg.m, cfg.weight));
        trace.l2_u.push(l2_from_coeffs(&grid, u));
        trace.l2_v.push(l2_from_coeffs(&grid, v));
    })?;
    Ok(trace)
}

/// Recorded states of the configured run.
pub fn simulate_states(cfg: &SimConfig) -> Result<Vec<State>> {
    let (u0, v0) = cfg.initial_data.build(&cfg.grid)?;
    let mut states = Vec::new();
    let mut failure = None;
    evolve(cfg, &u0, &v0, |t, u, v| {
        let built = SpectralField::from_coeffs(&cfg.grid, u.to_vec())
            .and_then(|a| Ok((a, SpectralField::from_coeffs(&cfg.grid, v.to_vec())?)))
            .and_then(|(a, b)| State::new(a, b, t));
        match built {
            Ok(st) => states.push(st),
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(states),
    }
}

/// Largest relative energy change between recorded states accepted by
/// [`dissipation_residual`].
pub const MAX_RECORD_ENERGY_CHANGE: f64 = 0.05;

/// `max |dE/dt + mean int gamma |v|^2| / E` over consecutive recorded states,
/// with `E = ||(u, v)||^2 / 2` in the energy weight `m + |xi|^s`.
pub fn dissipation_residual(
    states: &[State],
    s: f64,
    m: f64,
    gamma: &DampingProfile,
) -> Result<f64> {
    if states.len() < 2 {
        return Err(Error::InsufficientData("need at least two recorded states".into()));
    }
    let samples = gamma.samples(states[0].grid())?;
    let h = states[0].grid().spacing();
    let half_energy = |st: &State| 0.5 * energy_weighted(st, s, m, EnergyWeight::Energy).powi(2);
    let loss = |st: &State| -> f64 {
        h * st.v.values().iter().zip(&samples).map(|(v, g)| g * v.norm_sqr()).sum::<f64>()
    };
    let mut worst = 0.0f64;
    for pair in states.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (ea, eb) = (half_energy(a), half_energy(b));
        let dt = b.t - a.t;
        if !(dt > 0.0) {
            return Err(Error::param("states", "times must increase"));
        }
        let e = ea.max(eb);
        if e == 0.0 {
            continue;
        }
        if (eb - ea).abs() / e > MAX_RECORD_ENERGY_CHANGE {
            return Err(Error::UnderResolved(format!(
                "record stride too coarse: energy changed by {:.3e} between t = {} and t = {}",
                (eb - ea).abs() / e,
                a.t,
                b.t
            )));
        }
        let rate = (eb - ea) / dt + 0.5 * (loss(a) + loss(b));
        worst = worst.max(rate.abs() / e);
    }
    Ok(worst)
}
