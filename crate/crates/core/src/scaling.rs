//! Structure-function estimator `m(q, Δ)`, the `ζ_q` / H / ν regressions, and
//! increment-distribution diagnostics.

use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::num::{fit_line, Real};

/// Calendar gap (in days) above which consecutive observations are flagged.
pub const GAP_DAYS: i64 = 4;

pub const DEFAULT_Q_GRID: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];

pub fn default_q_grid<T: Real>() -> Vec<T> {
    DEFAULT_Q_GRID.iter().map(|&q| T::lit(q)).collect()
}

pub fn default_delta_grid() -> Vec<usize> {
    (1..=30).collect()
}

/// What the values of a [`VolSeries`] measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Volatility `σ`.
    Vol,
    /// Variance `σ²`.
    Var,
    /// Log-variance `log σ²`.
    LogVar,
}

impl std::str::FromStr for Units {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vol" => Ok(Units::Vol),
            "var" => Ok(Units::Var),
            "logvar" => Ok(Units::LogVar),
            other => Err(invalid(format!("unknown units {other:?} (vol, var, logvar)"))),
        }
    }
}

/// Daily volatility-proxy series. Increments are always taken on index lags
/// (trading days); calendar gaps are recorded in `gaps` but do not split the
/// series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct VolSeries<T> {
    dates: Vec<NaiveDate>,
    values: Vec<T>,
    units: Units,
    label: String,
    /// Indices `i` with more than [`GAP_DAYS`] calendar days since `i - 1`.
    gaps: Vec<usize>,
}

impl<T: Real> VolSeries<T> {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<T>, units: Units, label: impl Into<String>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(invalid(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        let mut dups = Vec::new();
        let mut gaps = Vec::new();
        for i in 1..dates.len() {
            let step = (dates[i] - dates[i - 1]).num_days();
            if step == 0 {
                dups.push(dates[i].to_string());
            } else if step < 0 {
                return Err(invalid(format!(
                    "dates not ascending at index {i}: {} after {}",
                    dates[i],
                    dates[i - 1]
                )));
            } else if step > GAP_DAYS {
                gaps.push(i);
            }
        }
        if !dups.is_empty() {
            dups.dedup();
            return Err(Error::DuplicateDates(dups));
        }
        for (i, &v) in values.iter().enumerate() {
            let bad = !v.is_finite() || (units != Units::LogVar && v <= T::zero());
            if bad {
                return Err(Error::NonPositiveValue {
                    index: i,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            dates,
            values,
            units,
            label: label.into(),
            gaps,
        })
    }

    /// Series on consecutive weekdays starting 2000-01-03; for simulated data.
    pub fn from_values(values: Vec<T>, units: Units, label: impl Into<String>) -> Result<Self> {
        let dates = weekdays_from(NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date"), values.len());
        Self::new(dates, values, units, label)
    }

    /// Series from log-volatility values.
    pub fn from_log_vol(log_vol: &[T], label: impl Into<String>) -> Result<Self> {
        let two = T::lit(2.0);
        Self::from_values(log_vol.iter().map(|&x| two * x).collect(), Units::LogVar, label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gaps(&self) -> &[usize] {
        &self.gaps
    }

    pub fn log_vol(&self) -> Vec<T> {
        let half = T::lit(0.5);
        match self.units {
            Units::Vol => self.values.iter().map(|v| v.ln()).collect(),
            Units::Var => self.values.iter().map(|v| half * v.ln()).collect(),
            Units::LogVar => self.values.iter().map(|&v| half * v).collect(),
        }
    }

    pub fn log_var(&self) -> Vec<T> {
        let two = T::lit(2.0);
        self.log_vol().into_iter().map(|x| two * x).collect()
    }

    pub fn variances(&self) -> Vec<T> {
        match self.units {
            Units::Vol => self.values.iter().map(|&v| v * v).collect(),
            Units::Var => self.values.clone(),
            Units::LogVar => self.values.iter().map(|v| v.exp()).collect(),
        }
    }

    /// Contiguous sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize, label: impl Into<String>) -> Result<Self> {
        if start > end || end > self.len() {
            return Err(invalid(format!("slice {start}..{end} out of range for length {}", self.len())));
        }
        Self::new(
            self.dates[start..end].to_vec(),
            self.values[start..end].to_vec(),
            self.units,
            label,
        )
    }

    /// Restricts to dates in `[from, to]` (either bound optional).
    pub fn between(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| from.map_or(true, |f| self.dates[i] >= f) && to.map_or(true, |t| self.dates[i] <= t))
            .collect();
        Self::new(
            keep.iter().map(|&i| self.dates[i]).collect(),
            keep.iter().map(|&i| self.values[i]).collect(),
            self.units,
            self.label.clone(),
        )
    }
}

pub(crate) fn weekdays_from(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// `m(q, Δ)` on log-volatility values: mean of `|x_{k+Δ} − x_k|^q` along each
/// of the `Δ` sub-grids with a distinct starting offset, then averaged over
/// offsets.
pub fn structure_function<T: Real>(log_vol: &[T], q: T, delta: usize) -> Result<T> {
    if delta == 0 {
        return Err(invalid("delta must be positive"));
    }
    if !(q > T::zero()) {
        return Err(invalid(format!("q must be positive, got {q}")));
    }
    let n = log_vol.len();
    if n <= delta {
        return Err(Error::SeriesTooShort {
            required: delta + 1,
            actual: n,
        });
    }
    let mut total = T::zero();
    let mut offsets = 0usize;
    for o in 0..delta.min(n - delta) {
        let mut s = T::zero();
        let mut count = 0usize;
        let mut k = o;
        while k + delta < n {
            s = s + (log_vol[k + delta] - log_vol[k]).abs().powf(q);
            count += 1;
            k += delta;
        }
        total = total + s / T::from_usize_lossy(count);
        offsets += 1;
    }
    Ok(total / T::from_usize_lossy(offsets))
}

pub fn m_q_delta<T: Real>(series: &VolSeries<T>, q: T, delta: usize) -> Result<T> {
    structure_function(&series.log_vol(), q, delta)
}

/// Log-log regression of `m(q, ·)` for one `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct QFit<T> {
    pub q: T,
    pub zeta: T,
    pub zeta_stderr: T,
    pub intercept: T,
    pub r_squared: T,
    /// `log m − fitted`, one per lag.
    pub residuals: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ScalingReport<T> {
    pub label: String,
    pub n_obs: usize,
    pub q_grid: Vec<T>,
    pub delta_grid: Vec<usize>,
    /// `m_values[i][j] = m(q_grid[i], delta_grid[j])`.
    pub m_values: Vec<Vec<T>>,
    pub fits: Vec<QFit<T>>,
    /// Through-origin least-squares slope of `ζ_q` against `q`.
    pub hurst_hat: T,
    pub nu_hat: T,
}

impl<T: Real> ScalingReport<T> {
    pub fn zeta(&self) -> Vec<T> {
        self.fits.iter().map(|f| f.zeta).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// `q,delta,m,fitted` rows for plotting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "q,delta,m,fitted")?;
        for (fit, row) in self.fits.iter().zip(&self.m_values) {
            for (&d, &m) in self.delta_grid.iter().zip(row) {
                let fitted = (fit.intercept + fit.zeta * T::from_usize_lossy(d).ln()).exp();
                writeln!(out, "{},{},{},{}", fit.q, d, m, fitted)?;
            }
        }
        Ok(())
    }
}

fn fit_one<T: Real>(log_vol: &[T], q: T, delta_grid: &[usize]) -> Result<(Vec<T>, QFit<T>)> {
    let m: Vec<T> = delta_grid
        .iter()
        .map(|&d| structure_function(log_vol, q, d))
        .collect::<Result<_>>()?;
    if m.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::DegenerateRegression(format!(
            "m(q={q}, Δ) vanishes for some lag"
        )));
    }
    let x: Vec<T> = delta_grid.iter().map(|&d| T::from_usize_lossy(d).ln()).collect();
    let y: Vec<T> = m.iter().map(|v| v.ln()).collect();
    let line = fit_line(&x, &y)
        .ok_or_else(|| Error::DegenerateRegression("lag grid has no spread".into()))?;
    let residuals = x
        .iter()
        .zip(&y)
        .map(|(&xi, &yi)| yi - (line.intercept + line.slope * xi))
        .collect();
    Ok((
        m,
        QFit {
            q,
            zeta: line.slope,
            zeta_stderr: line.slope_stderr,
            intercept: line.intercept,
            r_squared: line.r_squared,
            residuals,
        },
    ))
}

/// Regresses `log m(q, Δ)` on `log Δ` for each `q`, then aggregates
/// `H = Σ ζ_q q / Σ q²` and `ν = exp(intercept_{q=2} / 2)`.
pub fn fit_scaling<T: Real>(series: &VolSeries<T>, q_grid: &[T], delta_grid: &[usize]) -> Result<ScalingReport<T>> {
    fit_scaling_log(&series.log_vol(), series.label(), q_grid, delta_grid)
}

/// [`fit_scaling`] on raw log-volatility values.
pub fn fit_scaling_log<T: Real>(
    log_vol: &[T],
    label: &str,
    q_grid: &[T],
    delta_grid: &[usize],
) -> Result<ScalingReport<T>> {
    if q_grid.is_empty() || delta_grid.len() < 2 {
        return Err(invalid("need at least one q and two lags"));
    }
    let rows: Vec<(Vec<T>, QFit<T>)> = q_grid
        .par_iter()
        .map(|&q| fit_one(log_vol, q, delta_grid))
        .collect::<Result<_>>()?;
    let (m_values, fits): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let num: T = fits.iter().map(|f| f.zeta * f.q).sum();
    let den: T = fits.iter().map(|f| f.q * f.q).sum();
    let two = T::lit(2.0);
    let intercept2 = match fits.iter().find(|f| f.q == two) {
        Some(f) => f.intercept,
        None => fit_one(log_vol, two, delta_grid)?.1.intercept,
    };
    Ok(ScalingReport {
        label: label.to_string(),
        n_obs: log_vol.len(),
        q_grid: q_grid.to_vec(),
        delta_grid: delta_grid.to_vec(),
        m_values,
        fits,
        hurst_hat: num / den,
        nu_hat: (intercept2 / two).exp(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Histogram<T> {
    /// `bins + 1` ascending edges.
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
    /// Counts normalized to unit area.
    pub density: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct NormalFit<T> {
    pub mean: T,
    pub std: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct IncrementMoments<T> {
    pub delta: usize,
    pub n: usize,
    pub mean: T,
    pub variance: T,
    pub skewness: T,
    pub excess_kurtosis: T,
    pub histogram: Histogram<T>,
    /// Normal fit to the lag-1 increments with its standard deviation scaled
    /// by `Δ^H`, for overlaying on this lag's histogram.
    pub rescaled_normal: NormalFit<T>,
    pub hurst_used: T,
}

fn moments<T: Real>(xs: &[T]) -> (T, T, T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    m2 = m2 / n;
    m3 = m3 / n;
    m4 = m4 / n;
    let skew = m3 / m2.powf(T::lit(1.5));
    let kurt = m4 / (m2 * m2) - T::lit(3.0);
    (mean, m2, skew, kurt)
}

fn histogram<T: Real>(xs: &[T], bins: usize) -> Histogram<T> {
    let bins = bins.max(1);
    let lo = xs.iter().copied().fold(T::infinity(), T::min);
    let hi = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let width = if hi > lo { (hi - lo) / T::from_usize_lossy(bins) } else { T::one() };
    let edges: Vec<T> = (0..=bins).map(|i| lo + width * T::from_usize_lossy(i)).collect();
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let idx = ((x - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        counts[idx] += 1;
    }
    let total = T::from_usize_lossy(xs.len()) * width;
    let density = counts.iter().map(|&c| T::from_usize_lossy(c) / total).collect();
    Histogram { edges, counts, density }
}

/// Moments and histogram of overlapping log-volatility increments at lag
/// `delta`. When `hurst` is `None` it is estimated with the default grids.
pub fn increment_moments<T: Real>(
    series: &VolSeries<T>,
    delta: usize,
    bins: usize,
    hurst: Option<T>,
) -> Result<IncrementMoments<T>> {
    let x = series.log_vol();
    if delta == 0 {
        return Err(invalid("delta must be positive"));
    }
    if x.len() <= delta + 1 {
        return Err(Error::SeriesTooShort {
            required: delta + 2,
            actual: x.len(),
        });
    }
    let incs: Vec<T> = x.windows(delta + 1).map(|w| w[delta] - w[0]).collect();
    let (mean, variance, skewness, excess_kurtosis) = moments(&incs);
    let one_day: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let (m1, v1, _, _) = moments(&one_day);
    let h = match hurst {
        Some(h) => h,
        None => fit_scaling_log(&x, series.label(), &default_q_grid(), &default_delta_grid())?.hurst_hat,
    };
    let scale = T::from_usize_lossy(delta).powf(h);
    Ok(IncrementMoments {
        delta,
        n: incs.len(),
        mean,
        variance,
        skewness,
        excess_kurtosis,
        histogram: histogram(&incs, bins),
        rescaled_normal: NormalFit {
            mean: m1 * T::from_usize_lossy(delta),
            std: v1.sqrt() * scale,
        },
        hurst_used: h,
    })
}

/// Independent scaling fits on `n_segments` contiguous pieces; the last piece
/// absorbs the remainder.
pub fn split_reestimate<T: Real>(
    series: &VolSeries<T>,
    n_segments: usize,
    q_grid: &[T],
    delta_grid: &[usize],
) -> Result<Vec<ScalingReport<T>>> {
    if n_segments == 0 {
        return Err(invalid("n_segments must be positive"));
    }
    let n = series.len();
    let len = n / n_segments;
    let need = delta_grid.iter().copied().max().unwrap_or(1) + 1;
    let log_vol = series.log_vol();
    let mut out = Vec::with_capacity(n_segments);
    for s in 0..n_segments {
        let start = s * len;
        let end = if s + 1 == n_segments { n } else { start + len };
        if end - start < need {
            return Err(Error::SegmentTooShort {
                segment: s,
                length: end - start,
            });
        }
        let label = if n_segments == 1 {
            series.label().to_string()
        } else {
            format!("{} [{}..{}]", series.label(), series.dates[start], series.dates[end - 1])
        };
        out.push(fit_scaling_log(&log_vol[start..end], &label, q_grid, delta_grid)?);
    }
    Ok(out)
}
