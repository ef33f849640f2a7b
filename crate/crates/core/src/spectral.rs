//! Periodic spectral representation on `[-L, L)`.
//!
//! A [`SpectralField`] carries a function both as samples at the collocation
//! points `x_j = -L + j h`, `h = 2L / n`, and as Fourier coefficients in the
//! expansion `f(x) = sum_k c_k exp(i xi_k x)` with `xi_k = pi k / L`.
//! Coefficients are stored in FFT order: slot `p` holds wavenumber `p` for
//! `p < n/2` and `p - n` otherwise, so the Nyquist slot is `k = -n/2`.
//!
//! With this normalisation the trapezoidal L2 norm of the samples equals
//! `sqrt(2L * sum |c_k|^2)` exactly, which is the weight used by every
//! Sobolev norm in the crate.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as c64;
use rustfft::{Fft, FftPlanner};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};

struct GridInner {
    n_modes: usize,
    half_period: f64,
    frequencies: Vec<f64>,
    points: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid with its Fourier frequency ladder.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl Grid {
    pub fn new(n_modes: usize, half_period: f64) -> Result<Self> {
        if n_modes < 4 || n_modes % 2 != 0 {
            return Err(Error::param(
                "n_modes",
                format!("must be even and at least 4, got {n_modes}"),
            ));
        }
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::param(
                "half_period",
                format!("must be positive and finite, got {half_period}"),
            ));
        }
        let n = n_modes;
        let step = 2.0 * half_period / n as f64;
        let frequencies = (0..n)
            .map(|p| std::f64::consts::PI * wavenumber_of_slot(p, n) as f64 / half_period)
            .collect();
        let points = (0..n).map(|j| -half_period + j as f64 * step).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                n_modes,
                half_period,
                frequencies,
                points,
                forward,
                inverse,
            }),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.inner.n_modes
    }

    pub fn half_period(&self) -> f64 {
        self.inner.half_period
    }

    pub fn period(&self) -> f64 {
        2.0 * self.inner.half_period
    }

    /// Collocation spacing `2L / n`.
    pub fn spacing(&self) -> f64 {
        self.period() / self.n_modes() as f64
    }

    /// Spacing of the frequency ladder, `pi / L`.
    pub fn frequency_spacing(&self) -> f64 {
        std::f64::consts::PI / self.inner.half_period
    }

    /// Frequencies `xi_p` in FFT slot order.
    pub fn frequencies(&self) -> &[f64] {
        &self.inner.frequencies
    }

    pub fn points(&self) -> &[f64] {
        &self.inner.points
    }

    /// Largest `|xi|` on the ladder (the Nyquist frequency).
    pub fn max_abs_frequency(&self) -> f64 {
        self.frequency_spacing() * (self.n_modes() / 2) as f64
    }

    /// Integer wavenumber stored in FFT slot `p`.
    pub fn wavenumber(&self, slot: usize) -> i64 {
        wavenumber_of_slot(slot, self.n_modes())
    }

    /// FFT slot holding wavenumber `k`, if it is on the grid.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.n_modes() / 2) as i64;
        if k < -half || k >= half {
            return None;
        }
        Some(k.rem_euclid(self.n_modes() as i64) as usize)
    }

    /// Samples to Fourier coefficients.
    pub fn forward(&self, values: &[c64]) -> Vec<c64> {
        let n = self.n_modes();
        let mut buf = values.to_vec();
        self.inner.forward.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (p, c) in buf.iter_mut().enumerate() {
            *c *= scale * alternating_sign(self.wavenumber(p));
        }
        buf
    }

    /// Fourier coefficients to samples.
    pub fn inverse(&self, coeffs: &[c64]) -> Vec<c64> {
        let mut buf: Vec<c64> = coeffs
            .iter()
            .enumerate()
            .map(|(p, c)| c * alternating_sign(self.wavenumber(p)))
            .collect();
        self.inner.inverse.process(&mut buf);
        buf
    }

    /// In-place variants used by the time stepper.
    pub(crate) fn forward_in_place(&self, buf: &mut [c64]) {
        self.inner.forward.process(buf);
        let scale = 1.0 / self.n_modes() as f64;
        for (p, c) in buf.iter_mut().enumerate() {
            *c *= scale * alternating_sign(self.wavenumber(p));
        }
    }

    pub(crate) fn inverse_in_place(&self, buf: &mut [c64]) {
        for (p, c) in buf.iter_mut().enumerate() {
            *c *= alternating_sign(self.wavenumber(p));
        }
        self.inner.inverse.process(buf);
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.n_modes() == other.n_modes() && self.half_period() == other.half_period())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_modes", &self.n_modes())
            .field("half_period", &self.half_period())
            .finish()
    }
}

pub fn make_grid(n_modes: usize, half_period: f64) -> Result<Grid> {
    Grid::new(n_modes, half_period)
}

fn wavenumber_of_slot(p: usize, n: usize) -> i64 {
    if p < n / 2 {
        p as i64
    } else {
        p as i64 - n as i64
    }
}

fn alternating_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A complex field held simultaneously as samples and Fourier coefficients.
///
/// Both representations are always kept in agreement; every constructor
/// computes the missing one.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<c64>,
    values: Vec<c64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.n_modes();
        Self {
            grid: grid.clone(),
            coeffs: vec![c64::new(0.0, 0.0); n],
            values: vec![c64::new(0.0, 0.0); n],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<c64>) -> Result<Self> {
        check_len(grid, values.len())?;
        let coeffs = grid.forward(&values);
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            values,
        })
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<c64>) -> Result<Self> {
        check_len(grid, coeffs.len())?;
        let values = grid.inverse(&coeffs);
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            values,
        })
    }

    /// Samples `f` at the collocation points.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64) -> c64) -> Self {
        let values: Vec<c64> = grid.points().iter().map(|&x| f(x)).collect();
        let coeffs = grid.forward(&values);
        Self {
            grid: grid.clone(),
            coeffs,
            values,
        }
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| c64::new(f(x), 0.0))
    }

    /// The single Fourier mode `exp(i pi k x / L)`.
    pub fn mode(grid: &Grid, k: i64) -> Result<Self> {
        let slot = grid.slot(k).ok_or_else(|| {
            Error::param("k", format!("wavenumber {k} is not on a {}-mode grid", grid.n_modes()))
        })?;
        let mut coeffs = vec![c64::new(0.0, 0.0); grid.n_modes()];
        coeffs[slot] = c64::new(1.0, 0.0);
        Self::from_coeffs(grid, coeffs)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[c64] {
        &self.coeffs
    }

    pub fn values(&self) -> &[c64] {
        &self.values
    }

    pub fn into_coeffs(self) -> Vec<c64> {
        self.coeffs
    }

    /// Trapezoidal L2 norm of the samples.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Quadrature inner product `<self, other> = h sum self_j conj(other_j)`.
    pub fn inner(&self, other: &SpectralField) -> Result<c64> {
        self.grid.ensure_same(&other.grid)?;
        let sum: c64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum * self.grid.spacing())
    }

    /// Same inner product evaluated from the coefficients.
    pub fn inner_spectral(&self, other: &SpectralField) -> Result<c64> {
        self.grid.ensure_same(&other.grid)?;
        let sum: c64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum * self.grid.period())
    }

    pub fn scale(&self, factor: c64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &SpectralField, op: impl Fn(c64, c64) -> c64) -> Result<SpectralField> {
        self.grid.ensure_same(&other.grid)?;
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| op(*a, *b)).collect(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect(),
        })
    }

    /// Applies a coefficient-wise multiplier `c_p <- m(xi_p) c_p`.
    pub fn map_spectrum(&self, multiplier: impl Fn(f64) -> c64) -> SpectralField {
        let coeffs: Vec<c64> = self
            .coeffs
            .iter()
            .zip(self.grid.frequencies())
            .map(|(c, &xi)| c * multiplier(xi))
            .collect();
        let values = self.grid.inverse(&coeffs);
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            values,
        }
    }

    /// Applies a pointwise map to the samples and refreshes the coefficients.
    pub fn map_values(&self, f: impl Fn(f64, c64) -> c64) -> SpectralField {
        let values: Vec<c64> = self
            .grid
            .points()
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| f(x, v))
            .collect();
        let coeffs = self.grid.forward(&values);
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            values,
        }
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len == grid.n_modes() {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "expected {} samples, got {len}",
            grid.n_modes()
        )))
    }
}

/// Exponent `r` of the Sobolev weight `(1 + xi^2)^r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevOrder(f64);

impl SobolevOrder {
    pub const L2: SobolevOrder = SobolevOrder(0.0);

    pub fn new(order: f64) -> Result<Self> {
        if order.is_finite() {
            Ok(Self(order))
        } else {
            Err(Error::param("order", "Sobolev order must be finite"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Weight `(1 + xi^2)^r` applied to `|c|^2`.
    pub fn weight(self, xi: f64) -> f64 {
        (1.0 + xi * xi).powf(self.0)
    }
}

/// Weight realising the displacement part of the energy-space norm.
///
/// `Sobolev` gives the H^{s/2} norm `(1 + xi^2)^{s/2} |c|^2`; `Energy`
/// gives `(m + |xi|^s) |c|^2`, for which the undamped flow is an isometry.
/// The two are equivalent on every fixed grid, with constants depending on
/// `m` and `s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyWeight {
    #[default]
    Sobolev,
    Energy,
}

impl EnergyWeight {
    /// Squared weight multiplying `|u_hat(xi)|^2`.
    pub fn squared(self, xi: f64, s: f64, m: f64) -> f64 {
        match self {
            EnergyWeight::Sobolev => (1.0 + xi * xi).powf(s / 2.0),
            EnergyWeight::Energy => m + xi.abs().powf(s),
        }
    }
}

/// `(-d^2/dx^2)^{s/2}` as the Fourier multiplier `|xi|^s`.
pub fn frac_laplacian_apply(f: &SpectralField, s: f64) -> Result<SpectralField> {
    check_order(s)?;
    Ok(f.map_spectrum(|xi| c64::new(xi.abs().powf(s), 0.0)))
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(Error::param("s", format!("fractional order must be positive, got {s}")))
    }
}

pub fn sobolev_norm(f: &SpectralField, order: SobolevOrder) -> f64 {
    let sum: f64 = f
        .coeffs()
        .iter()
        .zip(f.grid().frequencies())
        .map(|(c, &xi)| order.weight(xi) * c.norm_sqr())
        .sum();
    (f.grid().period() * sum).sqrt()
}

/// Collocation product `gamma(x) f(x)`.
pub fn multiply_pointwise(f: &SpectralField, gamma: &DampingProfile) -> Result<SpectralField> {
    let samples = gamma.samples(f.grid())?;
    let values: Vec<c64> = f.values().iter().zip(&samples).map(|(v, g)| v * g).collect();
    SpectralField::from_values(f.grid(), values)
}
