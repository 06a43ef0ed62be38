//! RFSV log-variance and variance predictors, AR / HAR baselines and the
//! rolling P-ratio harness.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{invert_dense, levinson_durbin, solve_dense};
use crate::num::{mean, Real};
use crate::quad::integrate;
use crate::scaling::{default_delta_grid, default_q_grid, fit_scaling, fit_scaling_log, VolSeries};
use crate::special::gamma;

pub const DEFAULT_TRAINING_WINDOW: usize = 500;
pub const DEFAULT_HORIZONS: [usize; 3] = [1, 5, 20];
/// Truncation level used to pick the default lookback `r`.
pub const DEFAULT_EPSILON: f64 = 0.01;

const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

fn check_hurst<T: Real>(hurst: T) -> Result<()> {
    if !(hurst >= T::zero() && hurst < T::lit(0.5)) {
        return Err(invalid(format!("forecasting needs 0 <= hurst < 1/2, got {hurst}")));
    }
    Ok(())
}

/// `ε(r) = ∫_r^∞ du / ((u+1) u^{H+1/2})`.
///
/// Evaluated after `t = u^{−(H+1/2)}`, which turns it into the bounded
/// integral `(1/a) ∫_0^{r^{−a}} dt / (1 + t^{1/a})`.
pub fn truncation_epsilon<T: Real>(hurst: T, r: T) -> Result<T> {
    check_hurst(hurst)?;
    if !(r > T::zero()) {
        return Err(invalid("truncation r must be positive"));
    }
    let a = hurst + T::lit(0.5);
    let inv_a = T::one() / a;
    let q = integrate(
        |t: T| T::one() / (T::one() + t.powf(inv_a)),
        T::zero(),
        r.powf(-a),
        T::tol(1e-12),
        T::zero(),
    )?;
    Ok(q.value * inv_a)
}

/// `cos(Hπ)/π`: the kernel prefactor that makes its total mass one.
pub fn kernel_prefactor<T: Real>(hurst: T) -> T {
    (hurst * T::PI()).cos() / T::PI()
}

/// Kernel mass beyond `r`, i.e. `cos(Hπ)/π · ε(r)`.
pub fn tail_mass<T: Real>(hurst: T, r: T) -> Result<T> {
    Ok(kernel_prefactor(hurst) * truncation_epsilon(hurst, r)?)
}

/// Smallest `r` with `ε(r) ≤ eps`, by bisection on `log r`.
pub fn truncation_for_epsilon<T: Real>(hurst: T, eps: T) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(invalid("epsilon must be positive"));
    }
    let (mut lo, mut hi) = (T::lit(-20.0), T::lit(60.0));
    if truncation_epsilon(hurst, hi.exp())? > eps {
        return Err(invalid(format!("epsilon {eps} unreachable")));
    }
    if truncation_epsilon(hurst, lo.exp())? <= eps {
        return Ok(lo.exp());
    }
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if truncation_epsilon(hurst, mid.exp())? > eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < T::tol(1e-13) {
            break;
        }
    }
    Ok(hi.exp())
}

/// `Γ(3/2−H) / (Γ(H+1/2) Γ(2−2H))`: conditional variance of fBM `Δ` ahead,
/// in units of `Δ^{2H}`.
pub fn conditional_variance_factor<T: Real>(hurst: T) -> T {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    gamma(T::lit(1.5) - hurst) / (gamma(hurst + half) * gamma(two - two * hurst))
}

/// Discretized predictor kernel. `weights[j]` multiplies the observation `j`
/// steps before the forecast origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RfsvKernel<T> {
    pub hurst: T,
    /// Forecast horizon in days.
    pub horizon: T,
    /// Grid spacing in days.
    pub step: T,
    /// Lookback in units of the horizon.
    pub truncation_r: T,
    pub weights: Vec<T>,
    /// `ε(r)` of the truncation.
    pub epsilon: T,
    pub renormalized: bool,
}

impl<T: Real> RfsvKernel<T> {
    /// Daily kernel for an integer horizon.
    pub fn new(hurst: T, horizon: usize, truncation_r: T) -> Result<Self> {
        Self::on_grid(hurst, T::from_usize_lossy(horizon), T::one(), truncation_r)
    }

    /// Kernel on a grid of spacing `step`, looking back `horizon · r` days.
    ///
    /// Each observation carries the kernel mass of its midpoint cell; the cell
    /// at the origin, `[0, step/2]`, holds the integrable `s^{−H−1/2}`
    /// singularity and is integrated after `s = v^{1/(1/2−H)}`.
    pub fn on_grid(hurst: T, horizon: T, step: T, truncation_r: T) -> Result<Self> {
        check_hurst(hurst)?;
        if !(horizon > T::zero()) || !(step > T::zero()) || !(truncation_r > T::zero()) {
            return Err(invalid("horizon, step and truncation r must be positive"));
        }
        let half = T::lit(0.5);
        let a = hurst + half;
        let pre = kernel_prefactor(hurst) * horizon.powf(a);
        let span = horizon * truncation_r;
        let n_cells = ((span / step + half).ceil()).to_usize().unwrap_or(1).max(1);
        let g = |s: T| T::one() / ((s + horizon) * s.powf(a));
        let rel = T::tol(1e-12);

        let first_hi = (half * step).min(span);
        let k = T::one() / (T::one() - a);
        let w0 = integrate(
            |v: T| k / (v.powf(k) + horizon),
            T::zero(),
            first_hi.powf(T::one() - a),
            rel,
            T::zero(),
        )?
        .value;

        let cell = |j: usize| -> Result<T> {
            let jf = T::from_usize_lossy(j);
            let lo = (jf - half) * step;
            let hi = ((jf + half) * step).min(span);
            if hi <= lo {
                return Ok(T::zero());
            }
            if j < 16 {
                return Ok(integrate(g, lo, hi, rel, T::zero())?.value);
            }
            let c = half * (lo + hi);
            let h = half * (hi - lo);
            Ok(GL8
                .iter()
                .map(|&(x, w)| {
                    let x = T::lit(x) * h;
                    T::lit(w) * (g(c - x) + g(c + x))
                })
                .sum::<T>()
                * h)
        };
        let mut weights = Vec::with_capacity(n_cells);
        weights.push(pre * w0);
        let rest: Vec<T> = (1..n_cells)
            .into_par_iter()
            .map(|j| cell(j).map(|v| pre * v))
            .collect::<Result<_>>()?;
        weights.extend(rest);
        while weights.len() > 1 && *weights.last().expect("nonempty") == T::zero() {
            weights.pop();
        }
        Ok(Self {
            hurst,
            horizon,
            step,
            truncation_r,
            weights,
            epsilon: truncation_epsilon(hurst, truncation_r)?,
            renormalized: false,
        })
    }

    /// Kernel whose lookback is the smaller of the default (`ε(r) ≤ 0.01`)
    /// and `max_lookback` observations, rescaled to unit mass.
    pub fn fitted_to_window(hurst: T, horizon: usize, max_lookback: usize) -> Result<Self> {
        let r_default = truncation_for_epsilon(hurst, T::lit(DEFAULT_EPSILON))?;
        let r_window = T::from_usize_lossy(max_lookback.saturating_sub(1).max(1)) / T::from_usize_lossy(horizon);
        Ok(Self::new(hurst, horizon, r_default.min(r_window))?.renormalize())
    }

    pub fn renormalize(mut self) -> Self {
        let s = self.mass();
        if s > T::zero() {
            for w in &mut self.weights {
                *w = *w / s;
            }
        }
        self.renormalized = true;
        self
    }

    pub fn mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weighted sum of the most recent observations of `history` (oldest
    /// first).
    pub fn apply(&self, history: &[T]) -> Result<T> {
        let n = history.len();
        if n < self.weights.len() {
            return Err(Error::InsufficientHistory {
                required: self.weights.len(),
                actual: n,
            });
        }
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(j, &w)| w * history[n - 1 - j])
            .sum())
    }
}

/// Predicted `log σ²` `horizon` days after the last observation of `history`.
pub fn rfsv_forecast_logvar<T: Real>(history: &VolSeries<T>, horizon: usize, hurst: T, truncation_r: T) -> Result<T> {
    RfsvKernel::new(hurst, horizon, truncation_r)?.apply(&history.log_var())
}

/// Log-variance forecast shifted by the lognormal correction `2 c ν² Δ^{2H}`.
pub fn variance_from_logvar<T: Real>(logvar_forecast: T, horizon: T, hurst: T, nu: T) -> Result<T> {
    if !(nu >= T::zero()) {
        return Err(invalid("nu must be nonnegative"));
    }
    let two = T::lit(2.0);
    let exponent = logvar_forecast + two * conditional_variance_factor(hurst) * nu * nu * horizon.powf(two * hurst);
    let v = exponent.exp();
    if !v.is_finite() {
        return Err(Error::Overflow(exponent.to_f64_lossy()));
    }
    Ok(v)
}

pub fn rfsv_forecast_var<T: Real>(
    history: &VolSeries<T>,
    horizon: usize,
    hurst: T,
    nu: T,
    truncation_r: T,
) -> Result<T> {
    let f = rfsv_forecast_logvar(history, horizon, hurst, truncation_r)?;
    variance_from_logvar(f, T::from_usize_lossy(horizon), hurst, nu)
}

/// AR(p) fitted by Yule–Walker. The `horizon`-step forecast iterates the
/// one-step recursion; `direct_*` hold the equivalent linear predictor
/// `K₀^Δ + Σ C_i^Δ y_{t−i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ArModel<T> {
    pub order: usize,
    pub horizon: usize,
    pub mean: T,
    /// One-step coefficients on lags `1..=p`.
    pub phi: Vec<T>,
    pub innovation_variance: T,
    pub direct_intercept: T,
    /// `C_i^Δ` on `y_{t−i}`, `i = 0..p`.
    pub direct_coefs: Vec<T>,
}

impl<T: Real> ArModel<T> {
    pub fn predict(&self, history: &[T]) -> Result<T> {
        let n = history.len();
        if n < self.order {
            return Err(Error::InsufficientHistory {
                required: self.order,
                actual: n,
            });
        }
        Ok(self.direct_intercept
            + self
                .direct_coefs
                .iter()
                .enumerate()
                .map(|(i, &c)| c * history[n - 1 - i])
                .sum::<T>())
    }
}

pub fn ar_fit<T: Real>(history: &[T], order: usize, horizon: usize) -> Result<ArModel<T>> {
    if order == 0 || horizon == 0 {
        return Err(invalid("AR order and horizon must be positive"));
    }
    let n = history.len();
    if n <= 2 * order {
        return Err(Error::InsufficientHistory {
            required: 2 * order + 1,
            actual: n,
        });
    }
    let mu = mean(history);
    let nf = T::from_usize_lossy(n);
    let acov: Vec<T> = (0..=order)
        .map(|l| (0..n - l).map(|k| (history[k] - mu) * (history[k + l] - mu)).sum::<T>() / nf)
        .collect();
    let (phi, innovation_variance) = levinson_durbin(&acov, order)?;
    // Row i of the iterated predictor: coefficients of the forecast of
    // y_{t+i} (demeaned) on y_t, ..., y_{t−p+1}.
    let mut rows: Vec<Vec<T>> = (0..order)
        .map(|i| {
            let mut r = vec![T::zero(); order];
            r[i] = T::one();
            r
        })
        .collect();
    // rows[k] represents y_{t−k}; extend forward by the recursion.
    let mut recent: std::collections::VecDeque<Vec<T>> = rows.drain(..).collect();
    for _ in 0..horizon {
        let mut next = vec![T::zero(); order];
        for (i, &p) in phi.iter().enumerate() {
            for (c, v) in next.iter_mut().zip(&recent[i]) {
                *c = *c + p * *v;
            }
        }
        recent.pop_back();
        recent.push_front(next);
    }
    let direct_coefs = recent.pop_front().expect("order >= 1");
    let direct_intercept = mu * (T::one() - direct_coefs.iter().copied().sum::<T>());
    Ok(ArModel {
        order,
        horizon,
        mean: mu,
        phi,
        innovation_variance,
        direct_intercept,
        direct_coefs,
    })
}

/// HAR regression `y_{t+Δ} = K₀ + C₀ y_t + C₅ mean₅ + C₂₀ mean₂₀`, the means
/// running over the last 5 and 20 observations including today.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct HarModel<T> {
    pub horizon: usize,
    /// `[K₀, C₀, C₅, C₂₀]`.
    pub coefs: [T; 4],
    pub stderr: [T; 4],
    pub n_samples: usize,
}

fn har_regressors<T: Real>(x: &[T], t: usize) -> [T; 4] {
    let m5 = x[t + 1 - 5..=t].iter().copied().sum::<T>() / T::lit(5.0);
    let m20 = x[t + 1 - 20..=t].iter().copied().sum::<T>() / T::lit(20.0);
    [T::one(), x[t], m5, m20]
}

impl<T: Real> HarModel<T> {
    pub fn predict(&self, history: &[T]) -> Result<T> {
        if history.len() < 20 {
            return Err(Error::InsufficientHistory {
                required: 20,
                actual: history.len(),
            });
        }
        let r = har_regressors(history, history.len() - 1);
        Ok((0..4).map(|i| self.coefs[i] * r[i]).sum())
    }
}

/// OLS fit using only targets inside `history`.
pub fn har_fit<T: Real>(history: &[T], horizon: usize) -> Result<HarModel<T>> {
    if horizon == 0 {
        return Err(invalid("horizon must be positive"));
    }
    let n = history.len();
    let required = 20 + horizon + 8;
    if n < required {
        return Err(Error::InsufficientHistory { required, actual: n });
    }
    let mut xtx = vec![vec![T::zero(); 4]; 4];
    let mut xty = vec![T::zero(); 4];
    let samples: Vec<([T; 4], T)> = (19..n - horizon)
        .map(|t| (har_regressors(history, t), history[t + horizon]))
        .collect();
    for (r, y) in &samples {
        for i in 0..4 {
            xty[i] = xty[i] + r[i] * *y;
            for j in 0..4 {
                xtx[i][j] = xtx[i][j] + r[i] * r[j];
            }
        }
    }
    let beta = solve_dense(&xtx, &xty)?;
    let rss: T = samples
        .iter()
        .map(|(r, y)| {
            let e = *y - (0..4).map(|i| beta[i] * r[i]).sum::<T>();
            e * e
        })
        .sum();
    let dof = T::from_usize_lossy(samples.len() - 4);
    let inv = invert_dense(&xtx)?;
    let s2 = rss / dof;
    let mut coefs = [T::zero(); 4];
    let mut stderr = [T::zero(); 4];
    for i in 0..4 {
        coefs[i] = beta[i];
        stderr[i] = (s2 * inv[i][i]).max(T::zero()).sqrt();
    }
    Ok(HarModel {
        horizon,
        coefs,
        stderr,
        n_samples: samples.len(),
    })
}

/// How the RFSV predictor obtains H (and ν, for variance forecasts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub enum HurstSource<T> {
    /// Estimated once on the whole series.
    FullSample,
    /// Re-estimated on each training window.
    Rolling,
    Fixed { hurst: T, nu: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub enum ModelSpec<T> {
    Rfsv { hurst: HurstSource<T> },
    Ar { order: usize },
    Har,
    /// Predicts the realized value; P = 0 by construction.
    PerfectForesight,
    /// Predicts the full-sample mean.
    UnconditionalMean,
}

impl<T: Real> ModelSpec<T> {
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Rfsv { .. } => "RFSV".into(),
            ModelSpec::Ar { order } => format!("AR({order})"),
            ModelSpec::Har => "HAR(3)".into(),
            ModelSpec::PerfectForesight => "oracle".into(),
            ModelSpec::UnconditionalMean => "mean".into(),
        }
    }

    /// The three baselines and the RFSV predictor compared in the tables.
    pub fn standard_set() -> Vec<Self> {
        vec![
            ModelSpec::Ar { order: 5 },
            ModelSpec::Ar { order: 10 },
            ModelSpec::Har,
            ModelSpec::Rfsv {
                hurst: HurstSource::FullSample,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    LogVariance,
    Variance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct HarnessConfig<T> {
    pub horizons: Vec<usize>,
    pub training_window: usize,
    pub target: Target,
    pub models: Vec<ModelSpec<T>>,
}

impl<T: Real> Default for HarnessConfig<T> {
    fn default() -> Self {
        Self {
            horizons: DEFAULT_HORIZONS.to_vec(),
            training_window: DEFAULT_TRAINING_WINDOW,
            target: Target::LogVariance,
            models: ModelSpec::standard_set(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ForecastRecord<T> {
    /// Forecast origin.
    pub date: NaiveDate,
    pub target_date: NaiveDate,
    pub horizon: usize,
    pub model: String,
    pub predicted_logvar: Option<T>,
    pub predicted_var: Option<T>,
    pub realized_logvar: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct PRow<T> {
    pub asset: String,
    pub horizon: usize,
    /// Model label → P.
    pub p: BTreeMap<String, T>,
    pub n_forecasts: usize,
    /// Forecasts dropped because the target date is missing. Lags count
    /// observations, so this is always zero; kept for output stability.
    pub skipped_missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct PTable<T> {
    pub target: Target,
    pub training_window: usize,
    pub hurst: T,
    pub nu: T,
    pub rows: Vec<PRow<T>>,
    #[serde(skip)]
    pub records: Vec<ForecastRecord<T>>,
}

impl<T: Real> PTable<T> {
    pub fn p(&self, horizon: usize, model: &str) -> Option<T> {
        self.rows
            .iter()
            .find(|r| r.horizon == horizon)
            .and_then(|r| r.p.get(model).copied())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_records_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "date,target_date,horizon,model,predicted_logvar,predicted_var,realized_logvar")?;
        let opt = |v: Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.date,
                r.target_date,
                r.horizon,
                r.model,
                opt(r.predicted_logvar),
                opt(r.predicted_var),
                r.realized_logvar
            )?;
        }
        Ok(())
    }
}

/// Rolling out-of-sample evaluation. For each origin `k` with a full training
/// window, every model forecasts `Δ` observations ahead from data up to `k`
/// only, and `P = Σ (actual − pred)² / Σ (actual − full-sample mean)²`.
pub fn evaluate_p_ratio<T: Real>(series: &VolSeries<T>, config: &HarnessConfig<T>) -> Result<PTable<T>> {
    let w = config.training_window;
    let max_h = config.horizons.iter().copied().max().unwrap_or(0);
    let n = series.len();
    if config.horizons.is_empty() || config.horizons.contains(&0) {
        return Err(invalid("horizons must be positive"));
    }
    if w < 60 {
        return Err(invalid("training window must be at least 60 observations"));
    }
    if n < w + max_h {
        return Err(Error::InsufficientHistory {
            required: w + max_h,
            actual: n,
        });
    }
    let logvar = series.log_var();
    let var: Vec<T> = logvar.iter().map(|x| x.exp()).collect();
    let (work, full_mean) = match config.target {
        Target::LogVariance => (&logvar, mean(&logvar)),
        Target::Variance => (&var, mean(&var)),
    };
    let full = fit_scaling(series, &default_q_grid(), &default_delta_grid())?;
    let (h_full, nu_full) = (full.hurst_hat.min(T::lit(0.499)).max(T::lit(1e-4)), full.nu_hat);

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &h in &config.horizons {
        let origins: Vec<usize> = (w - 1..n - h).collect();
        let mut p = BTreeMap::new();
        for model in &config.models {
            let fixed_kernel = match model {
                ModelSpec::Rfsv {
                    hurst: HurstSource::FullSample,
                } => Some((RfsvKernel::fitted_to_window(h_full, h, w)?, h_full, nu_full)),
                ModelSpec::Rfsv {
                    hurst: HurstSource::Fixed { hurst, nu },
                } => Some((RfsvKernel::fitted_to_window(*hurst, h, w)?, *hurst, *nu)),
                _ => None,
            };
            let preds: Vec<(Option<T>, Option<T>)> = origins
                .par_iter()
                .map(|&k| -> Result<(Option<T>, Option<T>)> {
                    let lo = k + 1 - w;
                    let window = &work[lo..=k];
                    let hf = T::from_usize_lossy(h);
                    let pair = match model {
                        ModelSpec::Rfsv { hurst } => {
                            let rolling;
                            let (kernel, hh, nu) = match (&fixed_kernel, hurst) {
                                (Some((kern, hh, nu)), _) => (kern, *hh, *nu),
                                _ => {
                                    let fit = fit_scaling_log(
                                        &logvar[lo..=k].iter().map(|&x| T::lit(0.5) * x).collect::<Vec<_>>(),
                                        "",
                                        &default_q_grid(),
                                        &default_delta_grid(),
                                    )?;
                                    let hh = fit.hurst_hat.min(T::lit(0.499)).max(T::lit(1e-4));
                                    rolling = RfsvKernel::fitted_to_window(hh, h, w)?;
                                    (&rolling, hh, fit.nu_hat)
                                }
                            };
                            let f = kernel.apply(&logvar[lo..=k])?;
                            (Some(f), Some(variance_from_logvar(f, hf, hh, nu)?))
                        }
                        ModelSpec::Ar { order } => {
                            let v = ar_fit(window, *order, h)?.predict(window)?;
                            match config.target {
                                Target::LogVariance => (Some(v), None),
                                Target::Variance => (None, Some(v)),
                            }
                        }
                        ModelSpec::Har => {
                            let v = har_fit(window, h)?.predict(window)?;
                            match config.target {
                                Target::LogVariance => (Some(v), None),
                                Target::Variance => (None, Some(v)),
                            }
                        }
                        ModelSpec::PerfectForesight => (Some(logvar[k + h]), Some(var[k + h])),
                        ModelSpec::UnconditionalMean => match config.target {
                            Target::LogVariance => (Some(full_mean), None),
                            Target::Variance => (None, Some(full_mean)),
                        },
                    };
                    Ok(pair)
                })
                .collect::<Result<_>>()?;
            let (mut num, mut den) = (T::zero(), T::zero());
            for (&k, &(pl, pv)) in origins.iter().zip(&preds) {
                let actual = work[k + h];
                let pred = match config.target {
                    Target::LogVariance => pl,
                    Target::Variance => pv,
                }
                .expect("every model fills its target");
                num = num + (actual - pred) * (actual - pred);
                den = den + (actual - full_mean) * (actual - full_mean);
                records.push(ForecastRecord {
                    date: series.dates()[k],
                    target_date: series.dates()[k + h],
                    horizon: h,
                    model: model.label(),
                    predicted_logvar: pl,
                    predicted_var: pv,
                    realized_logvar: logvar[k + h],
                });
            }
            p.insert(model.label(), num / den);
        }
        rows.push(PRow {
            asset: series.label().to_string(),
            horizon: h,
            p,
            n_forecasts: origins.len(),
            skipped_missing: 0,
        });
    }
    Ok(PTable {
        target: config.target,
        training_window: w,
        hurst: h_full,
        nu: nu_full,
        rows,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_hurst_factor_is_one() {
        assert!((conditional_variance_factor(0.5f64) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn epsilon_is_decreasing_and_inverted() {
        let h = 0.14f64;
        let e1 = truncation_epsilon(h, 1.0).unwrap();
        let e10 = truncation_epsilon(h, 10.0).unwrap();
        assert!(e10 < e1);
        let r = truncation_for_epsilon(h, 0.01).unwrap();
        assert!((truncation_epsilon(h, r).unwrap() - 0.01).abs() < 1e-9);
    }

    #[test]
    fn weights_positive_decreasing_and_mass_matches_tail() {
        for h in [0.05f64, 0.14, 0.3, 0.45] {
            let k = RfsvKernel::new(h, 5, 40.0).unwrap();
            assert!(k.weights.iter().all(|&w| w > 0.0));
            assert!(k.weights.windows(2).all(|p| p[1] < p[0]));
            let missing = 1.0 - k.mass();
            let tail = tail_mass(h, 40.0).unwrap();
            assert!((missing - tail).abs() < 1e-9, "H {h}: {missing} vs {tail}");
        }
    }

    #[test]
    fn lookback_is_linear_in_horizon() {
        let a = RfsvKernel::new(0.14f64, 5, 10.0).unwrap();
        let b = RfsvKernel::new(0.14f64, 10, 10.0).unwrap();
        // Cells 0..=span, the last one truncated to half width.
        assert_eq!(a.len(), 51);
        assert_eq!(b.len(), 101);
    }

    #[test]
    fn ar_direct_coefficients_match_iteration() {
        let x: Vec<f64> = (0..300).map(|k| ((k * 37 % 17) as f64).sin()).collect();
        let m = ar_fit(&x, 3, 4).unwrap();
        let mut hist: Vec<f64> = x.iter().map(|v| v - m.mean).collect();
        for _ in 0..4 {
            let n = hist.len();
            let next = (0..3).map(|i| m.phi[i] * hist[n - 1 - i]).sum::<f64>();
            hist.push(next);
        }
        let iterated = hist.last().unwrap() + m.mean;
        assert!((m.predict(&x).unwrap() - iterated).abs() < 1e-12);
    }

    #[test]
    fn har_needs_history() {
        assert!(matches!(
            har_fit(&[0.0f64; 30], 5),
            Err(Error::InsufficientHistory { .. })
        ));
    }
}
