//! Covariance-structure products: empirical autocovariances, model `m(2, Δ)`
//! curves, and the fractional Stein–Stein smoothing-bias model that
//! quantifies how window-averaged variance inflates the measured H.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fracproc::{fou_autocov, fou_variance};
use crate::num::{fit_line, Real};
use crate::scaling::VolSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    /// Log-volatility.
    Log,
    /// Volatility level.
    Level,
}

/// Biased (1/N) autocovariance of `xs` at each lag.
pub fn autocov<T: Real>(xs: &[T], lags: &[usize]) -> Result<Vec<T>> {
    let n = xs.len();
    let max = lags.iter().copied().max().unwrap_or(0);
    if n <= max {
        return Err(Error::SeriesTooShort {
            required: max + 1,
            actual: n,
        });
    }
    let nf = T::from_usize_lossy(n);
    let mean = xs.iter().copied().sum::<T>() / nf;
    Ok(lags
        .iter()
        .map(|&l| {
            (0..n - l)
                .map(|k| (xs[k] - mean) * (xs[k + l] - mean))
                .sum::<T>()
                / nf
        })
        .collect())
}

pub fn empirical_autocov<T: Real>(series: &VolSeries<T>, lags: &[usize], transform: Transform) -> Result<Vec<T>> {
    let x = series.log_vol();
    match transform {
        Transform::Log => autocov(&x, lags),
        Transform::Level => autocov(&x.iter().map(|v| v.exp()).collect::<Vec<_>>(), lags),
    }
}

/// Model `m(2, Δ) = 2 (Var − Cov(Δ))` of a log-volatility fOU; with
/// `alpha = 0` this is the fBM curve `ν² Δ^{2H}`.
pub fn fsv_m2_curve<T: Real>(hurst: T, nu: T, alpha: T, lags: &[T]) -> Result<Vec<T>> {
    let two = T::lit(2.0);
    if alpha == T::zero() {
        if !(hurst > T::zero() && hurst < T::one()) || !(nu > T::zero()) {
            return Err(invalid("need 0 < hurst < 1 and nu > 0"));
        }
        return Ok(lags.iter().map(|l| nu * nu * l.abs().powf(two * hurst)).collect());
    }
    let var = fou_variance(hurst, nu, alpha)?;
    lags.iter()
        .map(|&l| Ok(two * (var - fou_autocov(hurst, nu, alpha, l)?)))
        .collect()
}

/// Generalized binomial coefficient `C(p, k)`.
fn binom<T: Real>(p: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, j| {
        let jf = T::from_usize_lossy(j);
        acc * (p - jf) / (jf + T::one())
    })
}

/// Ratio of the window-averaged to the spot second structure function,
/// as a function of `θ = δ/Δ`.
pub fn smoothing_bias_f<T: Real>(hurst: T, theta: T) -> Result<T> {
    if !(hurst > T::zero() && hurst < T::one()) {
        return Err(invalid(format!("hurst must lie in (0,1), got {hurst}")));
    }
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(invalid(format!("theta must lie in (0,1], got {theta}")));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let p = two * hurst + two;
    let denom = theta * theta * (p - one) * p;
    // The closed form cancels catastrophically for small θ.
    let bracket = if theta < T::lit(0.1) {
        bracket_series(p, theta)
    } else {
        bracket_closed(p, theta)
    };
    Ok(bracket / denom)
}

fn bracket_closed<T: Real>(p: T, theta: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    (one + theta).powf(p) - two - two * theta.powf(p) + (one - theta).powf(p)
}

/// Expands the even part `(1+θ)^p + (1−θ)^p = 2 Σ C(p, 2k) θ^{2k}` and drops
/// its `k = 0` term analytically.
fn bracket_series<T: Real>(p: T, theta: T) -> T {
    let two = T::lit(2.0);
    let t2 = theta * theta;
    let mut sum = T::zero();
    let mut pow = t2;
    for k in 1..60 {
        let term = binom(p, 2 * k) * pow;
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
        pow = pow * t2;
    }
    two * sum - two * theta.powf(p)
}

/// Parameters of the smoothing-bias model: spot log-vol `α W^H`, observed
/// through averages over windows of length `window` (days).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SmoothingSpec<T> {
    pub hurst: T,
    /// Amplitude of the fBM driver (not a mean-reversion rate).
    pub alpha_amp: T,
    pub window: T,
    pub lags: Vec<T>,
}

impl<T: Real> SmoothingSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_amp > T::zero()) {
            return Err(invalid("alpha_amp must be positive"));
        }
        if !(self.window > T::zero()) {
            return Err(invalid("window must be positive"));
        }
        if self.lags.is_empty() {
            return Err(invalid("no lags"));
        }
        let min = self.lags.iter().copied().fold(T::infinity(), T::min);
        if !(self.window < min) {
            return Err(invalid(format!(
                "window {} must be shorter than every lag (min {min})",
                self.window
            )));
        }
        Ok(())
    }
}

/// `α² Δ^{2H} f(δ/Δ)` at each lag.
pub fn smoothed_m2<T: Real>(spec: &SmoothingSpec<T>) -> Result<Vec<T>> {
    spec.validate()?;
    let two = T::lit(2.0);
    spec.lags
        .iter()
        .map(|&l| {
            let f = smoothing_bias_f(spec.hurst, spec.window / l)?;
            Ok(spec.alpha_amp * spec.alpha_amp * l.powf(two * spec.hurst) * f)
        })
        .collect()
}

/// Parameters recovered by naively fitting `log m2 = 2 log α + 2H log Δ` to a
/// smoothed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SmoothingFit<T> {
    pub alpha_hat: T,
    pub hurst_hat: T,
}

pub fn smoothing_bias_regression<T: Real>(spec: &SmoothingSpec<T>) -> Result<SmoothingFit<T>> {
    let m2 = smoothed_m2(spec)?;
    let x: Vec<T> = spec.lags.iter().map(|l| l.ln()).collect();
    let y: Vec<T> = m2.iter().map(|m| m.ln()).collect();
    let line = fit_line(&x, &y).ok_or_else(|| Error::DegenerateRegression("need two distinct lags".into()))?;
    let half = T::lit(0.5);
    Ok(SmoothingFit {
        alpha_hat: (half * line.intercept).exp(),
        hurst_hat: half * line.slope,
    })
}

/// Daily lags `1..=100` used for the smoothing-bias table.
pub fn bias_table_lags<T: Real>() -> Vec<T> {
    (1..=100).map(T::from_usize_lossy).collect()
}

/// `Δ^{2H}` abscissa for autocovariance-linearity plots.
pub fn power_axis<T: Real>(lags: &[T], hurst: T) -> Vec<T> {
    lags.iter().map(|l| l.powf(hurst + hurst)).collect()
}

/// Two-column plot data with a header row.
pub fn write_plot_csv<T: Real, W: Write>(mut out: W, header: (&str, &str), xs: &[T], ys: &[T]) -> Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (x, y) in xs.iter().zip(ys) {
        writeln!(out, "{x},{y}")?;
    }
    Ok(())
}

/// `(log x, log y)` pairs, skipping nonpositive entries.
pub fn log_log<T: Real>(xs: &[T], ys: &[T]) -> (Vec<T>, Vec<T>) {
    xs.iter()
        .zip(ys)
        .filter(|(x, y)| **x > T::zero() && **y > T::zero())
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_tends_to_one_and_matches_closed_form_across_switch() {
        let h = 0.14f64;
        let p = 2.0 * h + 2.0;
        // f − 1 is dominated by the nonanalytic −2θ^p term, so the approach to
        // one is only of order θ^{2H}.
        for theta in [1e-8f64, 1e-5] {
            let lead = -2.0 * theta.powf(2.0 * h) / (p * (p - 1.0));
            assert!((smoothing_bias_f(h, theta).unwrap() - 1.0 - lead).abs() < 1e-9);
        }
        for theta in [0.05f64, 0.1, 0.3] {
            let a = bracket_series(p, theta);
            let b = bracket_closed(p, theta);
            assert!(((a - b) / b).abs() < 1e-11, "theta {theta}: {a} vs {b}");
        }
        assert!(smoothing_bias_f(h, 0.0).is_err());
        assert!(smoothing_bias_f(h, 1.5).is_err());
    }

    #[test]
    fn ou_m2_curve() {
        let lags = [0.5f64, 1.0, 3.0];
        let m2 = fsv_m2_curve(0.5, 1.0, 1.0, &lags).unwrap();
        for (l, m) in lags.iter().zip(m2) {
            assert!((m - (1.0 - (-l).exp())).abs() < 1e-8);
        }
        let fbm = fsv_m2_curve(0.14f64, 0.3, 0.0, &[4.0]).unwrap();
        assert!((fbm[0] - 0.09 * 4f64.powf(0.28)).abs() < 1e-15);
    }

    #[test]
    fn lag_zero_autocov_is_biased_variance() {
        let x = [1.0f64, 2.0, 3.0, 4.0];
        assert!((autocov(&x, &[0]).unwrap()[0] - 1.25).abs() < 1e-15);
        assert!(autocov(&x, &[4]).is_err());
    }

    #[test]
    fn window_must_be_shorter_than_lags() {
        let spec = SmoothingSpec {
            hurst: 0.14f64,
            alpha_amp: 0.3,
            window: 2.0,
            lags: vec![1.0, 3.0],
        };
        assert!(smoothed_m2(&spec).is_err());
    }
}
