use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::num::Real;
use crate::quad::{cosine_tail, integrate};
use crate::special::{exp_weighted_lower, gamma, upper_incomplete_gamma};

/// Autocovariance of unit-spaced fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance<T: Real>(hurst: T, k: usize) -> T {
    let two_h = hurst + hurst;
    let kf = T::from_usize_lossy(k);
    let half = T::lit(0.5);
    if k == 0 {
        return T::one();
    }
    half * ((kf - T::one()).powf(two_h) - T::lit(2.0) * kf.powf(two_h) + (kf + T::one()).powf(two_h))
}

/// `Cov(W^H_s, W^H_t)` for standard fBM.
pub fn fbm_covariance<T: Real>(hurst: T, s: T, t: T) -> T {
    let two_h = hurst + hurst;
    T::lit(0.5) * (s.abs().powf(two_h) + t.abs().powf(two_h) - (t - s).abs().powf(two_h))
}

fn check_fou<T: Real>(hurst: T, nu: T, alpha: T) -> Result<()> {
    if !(hurst > T::zero() && hurst < T::one()) {
        return Err(invalid(format!("hurst must lie in (0,1), got {hurst}")));
    }
    if !(nu > T::zero()) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(invalid(format!(
            "stationary covariance needs alpha > 0, got {alpha}"
        )));
    }
    Ok(())
}

/// Stationary variance `ν² Γ(2H+1) / (2 α^{2H})`.
pub fn fou_variance<T: Real>(hurst: T, nu: T, alpha: T) -> Result<T> {
    check_fou(hurst, nu, alpha)?;
    let two_h = hurst + hurst;
    Ok(nu * nu * gamma(two_h + T::one()) * alpha.powf(-two_h) * T::lit(0.5))
}

/// `∫_0^∞ cos(ω y) y^{1−2H} / (1+y²) dy`, split at `y = 1` with substitutions
/// that remove the endpoint singularities.
fn spectral_integral<T: Real>(hurst: T, omega: T) -> Result<T> {
    let two = T::lit(2.0);
    let one = T::one();
    let two_h = hurst + hurst;
    let rel = T::tol(1e-12);
    let abs = T::tol(1e-15);

    // y = t^p on [0,1] with p = 1/(2−2H): the Jacobian cancels y^{1−2H}.
    let p = one / (two - two_h);
    let head = integrate(
        |t: T| {
            let y = t.powf(p);
            (omega * y).cos() * p / (one + y * y)
        },
        T::zero(),
        one,
        rel,
        abs,
    )?
    .value;

    if omega == T::zero() {
        // y = 1/t then t = u^{1/(2H)} maps the tail onto a smooth integrand.
        let inv_h = one / hurst;
        let tail = integrate(
            |u: T| one / (two_h * (one + u.powf(inv_h))),
            T::zero(),
            one,
            rel,
            abs,
        )?
        .value;
        return Ok(head + tail);
    }

    let amp = |y: T| y.powf(one - two_h) / (one + y * y);
    // First zero of cos(ω y) at or beyond y = 1.
    let k = (omega / T::PI() - T::lit(0.5)).ceil().max(T::zero());
    let z0 = ((k + T::lit(0.5)) * T::PI() / omega).max(one);
    // Log scale over [1, z0] tames the slow decay when ω is small.
    let mid = integrate(
        |s: T| {
            let y = s.exp();
            amp(y) * (omega * y).cos() * y
        },
        T::zero(),
        z0.ln(),
        rel,
        abs,
    )?
    .value;
    let tail = cosine_tail(amp, omega, z0, rel, abs)?.value;
    Ok(head + mid + tail)
}

/// Stationary autocovariance of the fOU process at `lag`, from its spectral
/// representation. Valid for every `H ∈ (0,1)`.
pub fn fou_autocov<T: Real>(hurst: T, nu: T, alpha: T, lag: T) -> Result<T> {
    check_fou(hurst, nu, alpha)?;
    if !lag.is_finite() {
        return Err(invalid("lag must be finite"));
    }
    let two_h = hurst + hurst;
    let k = nu * nu * gamma(two_h + T::one()) * (T::PI() * hurst).sin() / (T::lit(2.0) * T::PI());
    let omega = alpha * lag.abs();
    let i = spectral_integral(hurst, omega)?;
    let v = T::lit(2.0) * k * alpha.powf(-two_h) * i;
    if !v.is_finite() {
        return Err(Error::Overflow(v.to_f64_lossy()));
    }
    Ok(v)
}

/// Closed-form fOU autocovariance, valid only for `H > 1/2`.
pub fn fou_autocov_closed_form<T: Real>(hurst: T, nu: T, alpha: T, lag: T) -> Result<T> {
    check_fou(hurst, nu, alpha)?;
    if !(hurst > T::lit(0.5)) {
        return Err(invalid("closed form requires hurst > 1/2"));
    }
    let two_h = hurst + hurst;
    let a = two_h - T::one();
    let w = alpha * lag.abs();
    let pre = hurst * a * nu * nu / (T::lit(2.0) * alpha.powf(two_h));
    let body = (-w).exp() * (gamma(a) + exp_weighted_lower(a, w)) + w.exp() * upper_incomplete_gamma(a, w);
    Ok(pre * body)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LognormalMode {
    /// `exp{2m + Var + Cov(Δ)}`.
    Exact,
    /// Small-α limit `exp{2m + 2 Var} · exp{−ν² Δ^{2H} / 2}`.
    Approx,
}

/// `E[σ_t σ_{t+Δ}]` for `σ = exp(X)` with `X` a stationary fOU.
pub fn lognormal_vol_cov<T: Real>(
    hurst: T,
    nu: T,
    alpha: T,
    mean_level: T,
    lag: T,
    mode: LognormalMode,
) -> Result<T> {
    let var = fou_variance(hurst, nu, alpha)?;
    let two = T::lit(2.0);
    let exponent = match mode {
        LognormalMode::Exact => two * mean_level + var + fou_autocov(hurst, nu, alpha, lag)?,
        LognormalMode::Approx => {
            two * mean_level + two * var - nu * nu * lag.abs().powf(hurst + hurst) / two
        }
    };
    let v = exponent.exp();
    if !v.is_finite() {
        return Err(Error::Overflow(exponent.to_f64_lossy()));
    }
    Ok(v)
}
