//! Decay-rate predictions and exponent fits.
//!
//! The prediction side maps the fractional order `s` to the resolvent growth
//! exponents and, through the `alpha -> 1/alpha` rule for polynomially
//! growing resolvents, to the polynomial energy decay exponent. The fitting
//! side extracts exponents from measured scans and traces. All acceptance
//! logic uses [`check_upper_bound`]: the predicted exponents are upper
//! bounds, so a measured slope below them is not a failure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::check_order;

/// Minimum number of points in a fitted tail.
pub const MIN_TAIL_POINTS: usize = 8;

/// Default fraction of points used by the fits.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Stabilisation threshold for [`check_upper_bound`].
pub const STABILIZATION_FACTOR: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayRegime {
    Polynomial,
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePrediction {
    pub s: f64,
    pub regime: DecayRegime,
    /// `s / (4 - 2s)`; present only in the polynomial regime.
    pub poly_exponent: Option<f64>,
    /// Growth exponent of the damped Helmholtz resolvent on L2.
    pub resolvent_exponent_l2: f64,
    /// Growth exponent of the generator resolvent on the energy space.
    pub resolvent_exponent_energy: f64,
    /// Resolvent growth exponent that sets the polynomial decay rate.
    pub bt_alpha: Option<f64>,
}

pub fn predicted_decay(s: f64) -> Result<RatePrediction> {
    check_order(s)?;
    Ok(if s < 2.0 {
        let alpha = 4.0 / s - 2.0;
        RatePrediction {
            s,
            regime: DecayRegime::Polynomial,
            poly_exponent: Some(1.0 / alpha),
            resolvent_exponent_l2: 4.0 / s - 3.0,
            resolvent_exponent_energy: alpha,
            bt_alpha: Some(alpha),
        }
    } else {
        RatePrediction {
            s,
            regime: DecayRegime::Exponential,
            poly_exponent: None,
            resolvent_exponent_l2: 2.0 / s - 2.0,
            resolvent_exponent_energy: 2.0 / s - 1.0,
            bt_alpha: None,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub tail_fraction: f64,
    pub points_used: usize,
}

impl RateFit {
    /// Decay rate of an exponential fit (minus the slope).
    pub fn rate(&self) -> f64 {
        -self.slope
    }
}

fn check_tail_fraction(tail_fraction: f64) -> Result<()> {
    if tail_fraction > 0.0 && tail_fraction <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("tail_fraction", format!("must lie in (0, 1], got {tail_fraction}")))
    }
}

fn tail_range(len: usize, tail_fraction: f64) -> Result<std::ops::Range<usize>> {
    check_tail_fraction(tail_fraction)?;
    let count = ((len as f64) * tail_fraction).round() as usize;
    let count = count.min(len);
    if count < MIN_TAIL_POINTS {
        return Err(Error::InsufficientData(format!(
            "{count} tail points, need at least {MIN_TAIL_POINTS}"
        )));
    }
    Ok(len - count..len)
}

/// Ordinary least squares `y = slope * x + intercept`.
fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0).powi(2) {
        return Err(Error::InsufficientData("abscissae are constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy <= f64::EPSILON * n * my.abs().max(1.0).powi(2) {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r_squared))
}

fn check_same_len(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() == ys.len() {
        Ok(())
    } else {
        Err(Error::param("ys", format!("length {} differs from xs length {}", ys.len(), xs.len())))
    }
}

/// Log-log least squares on the last `tail_fraction` of the points.
pub fn fit_power_law(xs: &[f64], ys: &[f64], tail_fraction: f64) -> Result<RateFit> {
    check_same_len(xs, ys)?;
    let range = tail_range(xs.len(), tail_fraction)?;
    let mut lx = Vec::with_capacity(range.len());
    let mut ly = Vec::with_capacity(range.len());
    for i in range {
        if !(xs[i] > 0.0 && ys[i] > 0.0) {
            return Err(Error::param("data", "power-law fits need positive data"));
        }
        lx.push(xs[i].ln());
        ly.push(ys[i].ln());
    }
    let (slope, intercept, r_squared) = least_squares(&lx, &ly)?;
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        tail_fraction,
        points_used: lx.len(),
    })
}

/// Least squares of `ln(value)` against time on the tail; the decay rate
/// is [`RateFit::rate`].
pub fn fit_exponential(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<RateFit> {
    check_same_len(times, values)?;
    let range = tail_range(times.len(), tail_fraction)?;
    let mut ts = Vec::with_capacity(range.len());
    let mut ly = Vec::with_capacity(range.len());
    for i in range {
        if !(values[i] > 0.0) {
            return Err(Error::param("values", "exponential fits need positive values"));
        }
        ts.push(times[i]);
        ly.push(values[i].ln());
    }
    let (slope, intercept, r_squared) = least_squares(&ts, &ly)?;
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        tail_fraction,
        points_used: ts.len(),
    })
}

/// Strict interior local maxima of `values`.
pub fn local_maxima(times: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] {
            ts.push(times[i]);
            vs.push(values[i]);
        }
    }
    (ts, vs)
}

/// Exponential fit through the local maxima of an oscillating trace. A trace
/// with too few maxima to fit (a monotone energy, say) is its own envelope.
pub fn fit_envelope(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<RateFit> {
    check_same_len(times, values)?;
    let (ts, vs) = local_maxima(times, values);
    if (ts.len() as f64 * tail_fraction) < (2 * MIN_TAIL_POINTS) as f64 {
        return fit_exponential(times, values, tail_fraction);
    }
    fit_exponential(&ts, &vs, tail_fraction)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `y <= C x^exponent`; the ratio is `y / x^exponent`.
    Growth,
    /// `y <= C x^{-exponent}`; the ratio is `y * x^exponent`.
    Decay,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBoundCheck {
    /// Supremum of the normalised ratio over all points.
    pub sup_ratio: f64,
    /// Supremum over the first two thirds of the points.
    pub head_sup: f64,
    /// Supremum over the last third.
    pub tail_sup: f64,
    /// `tail_sup <= 1.1 * head_sup`: the last third does not push the
    /// running supremum up by more than ten percent.
    pub stabilized: bool,
}

impl UpperBoundCheck {
    pub fn growth_factor(&self) -> f64 {
        self.tail_sup / self.head_sup
    }
}

/// Bound-direction check: is `sup ys / xs^exponent` (or `ys * xs^exponent`
/// for decay bounds) finite and no longer growing on the last third?
pub fn check_upper_bound(
    xs: &[f64],
    ys: &[f64],
    exponent: f64,
    kind: BoundKind,
) -> Result<UpperBoundCheck> {
    check_same_len(xs, ys)?;
    if xs.len() < 3 {
        return Err(Error::InsufficientData("need at least three points".into()));
    }
    let ratios: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            if !(x > 0.0 && y >= 0.0) {
                return Err(Error::param("data", "bound checks need positive abscissae and non-negative values"));
            }
            Ok(match kind {
                BoundKind::Growth => y / x.powf(exponent),
                BoundKind::Decay => y * x.powf(exponent),
            })
        })
        .collect::<Result<_>>()?;
    Ok(split_sup(&ratios, ratios.len() - ratios.len() / 3))
}

/// Supremum check with an explicit split index (`head = ratios[..split]`).
pub fn split_sup(ratios: &[f64], split: usize) -> UpperBoundCheck {
    let sup = |xs: &[f64]| xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let head_sup = sup(&ratios[..split]);
    let tail_sup = sup(&ratios[split..]);
    let sup_ratio = head_sup.max(tail_sup);
    UpperBoundCheck {
        sup_ratio,
        head_sup,
        tail_sup,
        stabilized: sup_ratio.is_finite() && tail_sup <= STABILIZATION_FACTOR * head_sup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction_examples() {
        let p = predicted_decay(1.0).unwrap();
        assert_eq!(p.regime, DecayRegime::Polynomial);
        assert_eq!(p.poly_exponent, Some(0.5));
        assert_eq!(p.bt_alpha, Some(2.0));
        assert_eq!(p.resolvent_exponent_l2, 1.0);

        assert_eq!(predicted_decay(2.0).unwrap().regime, DecayRegime::Exponential);
        assert_eq!(predicted_decay(3.0).unwrap().poly_exponent, None);

        let p = predicted_decay(4.0 / 3.0).unwrap();
        assert!((p.poly_exponent.unwrap() - 1.0).abs() < 1e-12);
        assert!((p.bt_alpha.unwrap() - 1.0).abs() < 1e-12);
        let s: f64 = 4.0 / 3.0;
        assert!((s / (4.0 - 2.0 * s) - 1.0 / (4.0 / s - 2.0)).abs() < 1e-12);

        assert!(predicted_decay(0.0).is_err());
        assert!(predicted_decay(-1.0).is_err());
    }

    #[test]
    fn threshold_continuity() {
        let mut last = 0.0;
        for i in 1..=12 {
            let s = 2.0 - 10f64.powi(-i);
            let p = predicted_decay(s).unwrap();
            let poly = p.poly_exponent.unwrap();
            assert!(poly > last);
            last = poly;
            assert!(p.bt_alpha.unwrap() > 0.0);
        }
        // s / (4 - 2s) blows up at the threshold while bt_alpha closes to zero
        assert!(last > 1e11);
        let p = predicted_decay(2.0 - 1e-12).unwrap();
        assert!(p.bt_alpha.unwrap() < 1e-11);
        assert!((p.bt_alpha.unwrap() * p.poly_exponent.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn power_law_examples() {
        let xs: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let fit = fit_power_law(&xs, &ys, 1.0).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);

        let xs: Vec<f64> = (1..=400).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-0.5) * (1.0 + 0.01 * x.sin())).collect();
        let fit = fit_power_law(&xs, &ys, 0.5).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.05, "slope {}", fit.slope);

        let flat = vec![2.0; 20];
        let fit = fit_power_law(&xs[..20], &flat, 1.0).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn power_law_errors() {
        let xs: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let mut ys = xs.clone();
        ys[19] = -1.0;
        assert!(fit_power_law(&xs, &ys, 0.5).is_err());
        assert!(matches!(
            fit_power_law(&xs[..10], &xs[..10], 0.5),
            Err(Error::InsufficientData(_))
        ));
        let same = vec![3.0; 20];
        assert!(fit_power_law(&same, &xs, 1.0).is_err());
        assert!(fit_power_law(&xs, &xs, 0.0).is_err());
    }

    #[test]
    fn exponential_examples() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.7).collect();
        let vs: Vec<f64> = ts.iter().map(|t| 5.0 * (-0.3 * t).exp()).collect();
        let fit = fit_exponential(&ts, &vs, 0.5).unwrap();
        assert!((fit.rate() - 0.3).abs() < 1e-12);
        let flat = vec![1.5; 50];
        assert!(fit_exponential(&ts, &flat, 0.5).unwrap().rate().abs() < 1e-12);
        let mut bad = vs.clone();
        bad[49] = 0.0;
        assert!(fit_exponential(&ts, &bad, 0.5).is_err());
    }

    #[test]
    fn envelope_of_damped_oscillator() {
        // x'' + a x' + w^2 x = 0; eigenvalues -a/2 +- i sqrt(w^2 - a^2/4)
        let (a, w2) = (0.2f64, 9.0f64);
        let nu = (w2 - a * a / 4.0).sqrt();
        let ts: Vec<f64> = (0..20000).map(|i| i as f64 * 0.01).collect();
        // displacement |x| of x = e^{-a t/2} cos(nu t)
        let vs: Vec<f64> = ts
            .iter()
            .map(|&t| ((-a * t / 2.0).exp() * (nu * t).cos()).abs())
            .collect();
        let fit = fit_envelope(&ts, &vs, 0.5).unwrap();
        assert!((fit.rate() - a / 2.0).abs() < 0.02 * a / 2.0, "rate {}", fit.rate());
        assert!(fit.points_used > 50);

        // the energy sqrt(w^2 x^2 + x'^2) is monotone and is its own envelope
        let energy: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let e = (-a * t / 2.0).exp();
                let x = e * (nu * t).cos();
                let v = e * (-a / 2.0 * (nu * t).cos() - nu * (nu * t).sin());
                (w2 * x * x + v * v).sqrt()
            })
            .collect();
        let fit = fit_envelope(&ts, &energy, 0.5).unwrap();
        assert!((fit.rate() - a / 2.0).abs() < 0.02 * a / 2.0, "rate {}", fit.rate());
    }

    #[test]
    fn upper_bound_examples() {
        let xs: Vec<f64> = (0..40).map(|i| 10f64.powf(i as f64 / 16.0)).collect();
        let e = 1.3;
        let exact: Vec<f64> = xs.iter().map(|x| x.powf(e)).collect();
        let c = check_upper_bound(&xs, &exact, e, BoundKind::Growth).unwrap();
        assert!((c.sup_ratio - 1.0).abs() < 1e-12);
        assert!(c.stabilized);

        let below: Vec<f64> = xs.iter().map(|x| x.powf(e - 0.3)).collect();
        let c = check_upper_bound(&xs, &below, e, BoundKind::Growth).unwrap();
        assert!(c.stabilized);
        assert!(c.tail_sup < c.head_sup);

        let above: Vec<f64> = xs.iter().map(|x| x.powf(e + 0.3)).collect();
        let c = check_upper_bound(&xs, &above, e, BoundKind::Growth).unwrap();
        assert!(!c.stabilized);

        let decaying: Vec<f64> = xs.iter().map(|x| x.powf(-e)).collect();
        let c = check_upper_bound(&xs, &decaying, e, BoundKind::Decay).unwrap();
        assert!((c.sup_ratio - 1.0).abs() < 1e-12 && c.stabilized);
    }
}
