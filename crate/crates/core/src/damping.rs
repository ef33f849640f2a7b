//! Periodic damping coefficients `gamma(x) >= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingKind {
    /// `gamma = 0`; no positivity set.
    Zero,
    Constant,
    Indicator,
    /// Indicator with a raised-cosine ramp outside the support.
    SmoothedIndicator,
}

/// A damping coefficient repeated with period `period`.
///
/// For the indicator kinds the positivity set is the window
/// `[center - half_width, center + half_width]` and its period translates;
/// `gamma` equals `amplitude` there, so `epsilon = amplitude` is certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingProfile {
    pub kind: DampingKind,
    pub amplitude: f64,
    pub center: f64,
    pub half_width: f64,
    pub smoothing_width: f64,
    pub epsilon: f64,
    pub period: f64,
}

impl DampingProfile {
    pub fn zero(period: f64) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            kind: DampingKind::Zero,
            amplitude: 0.0,
            center: 0.0,
            half_width: 0.0,
            smoothing_width: 0.0,
            epsilon: 0.0,
            period,
        })
    }

    pub fn constant(amplitude: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        check_amplitude(amplitude)?;
        Ok(Self {
            kind: DampingKind::Constant,
            amplitude,
            center: 0.0,
            half_width: period / 2.0,
            smoothing_width: 0.0,
            epsilon: amplitude,
            period,
        })
    }

    pub fn indicator(amplitude: f64, center: f64, half_width: f64, period: f64) -> Result<Self> {
        Self::smoothed_indicator(amplitude, center, half_width, 0.0, period).map(|mut p| {
            p.kind = DampingKind::Indicator;
            p
        })
    }

    pub fn smoothed_indicator(
        amplitude: f64,
        center: f64,
        half_width: f64,
        smoothing_width: f64,
        period: f64,
    ) -> Result<Self> {
        check_period(period)?;
        check_amplitude(amplitude)?;
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("half_width", "must be positive"));
        }
        if !(smoothing_width >= 0.0 && smoothing_width.is_finite()) {
            return Err(Error::param("smoothing_width", "must be non-negative"));
        }
        if half_width + smoothing_width > period / 2.0 {
            return Err(Error::param(
                "half_width",
                format!(
                    "window plus ramp ({}) exceeds half the period ({})",
                    half_width + smoothing_width,
                    period / 2.0
                ),
            ));
        }
        if !center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(Self {
            kind: DampingKind::SmoothedIndicator,
            amplitude,
            center,
            half_width,
            smoothing_width,
            epsilon: amplitude,
            period,
        })
    }

    /// Smoothed indicator whose ramp spans four cells of `grid`.
    pub fn smoothed_for_grid(
        amplitude: f64,
        center: f64,
        half_width: f64,
        period: f64,
        grid: &Grid,
    ) -> Result<Self> {
        Self::smoothed_indicator(amplitude, center, half_width, 4.0 * grid.spacing(), period)
    }

    /// Lowers the certified bound on the positivity set.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if self.kind == DampingKind::Zero {
            return Err(Error::param("epsilon", "zero damping has no positivity set"));
        }
        if !(epsilon > 0.0 && epsilon <= self.amplitude) {
            return Err(Error::param(
                "epsilon",
                format!("must lie in (0, {}], got {epsilon}", self.amplitude),
            ));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.kind == DampingKind::Zero
    }

    /// Signed offset of `x` from the nearest window center.
    fn offset(&self, x: f64) -> f64 {
        let d = x - self.center;
        d - self.period * (d / self.period).round()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            DampingKind::Zero => 0.0,
            DampingKind::Constant => self.amplitude,
            DampingKind::Indicator | DampingKind::SmoothedIndicator => {
                let d = self.offset(x).abs();
                if d <= self.half_width {
                    self.amplitude
                } else if d < self.half_width + self.smoothing_width {
                    let t = (d - self.half_width) / self.smoothing_width;
                    0.5 * self.amplitude * (1.0 + (std::f64::consts::PI * t).cos())
                } else {
                    0.0
                }
            }
        }
    }

    /// Membership in the positivity set `Omega`.
    pub fn in_support(&self, x: f64) -> bool {
        match self.kind {
            DampingKind::Zero => false,
            DampingKind::Constant => true,
            _ => self.offset(x).abs() <= self.half_width,
        }
    }

    /// Sup norm of `gamma`.
    pub fn sup(&self) -> f64 {
        self.amplitude
    }

    /// Samples at the collocation points; the damping period must tile the
    /// grid period.
    pub fn samples(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        Ok(grid.points().iter().map(|&x| self.eval(x)).collect())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        let ratio = grid.period() / self.period;
        let nearest = ratio.round();
        if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-9 * ratio {
            Ok(())
        } else {
            Err(Error::PeriodMismatch {
                damping: self.period,
                grid: grid.period(),
            })
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::param("period", format!("must be positive, got {period}")))
    }
}

fn check_amplitude(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::param("amplitude", format!("must be positive, got {a}")))
    }
}
