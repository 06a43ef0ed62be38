//! Diagnostics that make a rough, short-memory volatility look long-memory:
//! scaling of the integrated-variance variance `V(t)`, fractional
//! differencing, and autocorrelations against white-noise bands.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::num::{fit_line, Real};
use crate::scaling::VolSeries;

pub const DEFAULT_MIN_BLOCKS: usize = 10;
pub const DEFAULT_FRAC_DIFF_TRUNCATION: usize = 500;
/// Dropped weight mass above which `frac_diff` flags its output.
pub const TAIL_MASS_WARNING: f64 = 0.01;

pub fn default_t_grid() -> Vec<usize> {
    (1..=50).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VtOptions {
    /// Use every window start instead of disjoint blocks.
    pub overlapping: bool,
    pub min_blocks: usize,
}

impl Default for VtOptions {
    fn default() -> Self {
        Self {
            overlapping: false,
            min_blocks: DEFAULT_MIN_BLOCKS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct VtReport<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    /// `(t, V(t))`.
    pub points: Vec<(usize, T)>,
}

impl<T: Real> VtReport<T> {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,v,log_t,log_v")?;
        for &(t, v) in &self.points {
            let tf = T::from_usize_lossy(t);
            writeln!(out, "{t},{v},{},{}", tf.ln(), v.ln())?;
        }
        Ok(())
    }
}

/// Sample variance of `t`-day sums of `daily_var`, regressed in logs on `t`.
pub fn vt_scaling_values<T: Real>(daily_var: &[T], t_grid: &[usize], opts: VtOptions) -> Result<VtReport<T>> {
    if t_grid.len() < 2 || t_grid.contains(&0) {
        return Err(invalid("t grid needs at least two positive entries"));
    }
    let n = daily_var.len();
    let need = opts.min_blocks.max(2);
    let t_max = t_grid.iter().copied().max().expect("nonempty");
    if n / t_max < need {
        return Err(Error::TooFewBlocks {
            required: need,
            actual: n / t_max,
        });
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(T::zero());
    for &v in daily_var {
        let last = *prefix.last().expect("nonempty");
        prefix.push(last + v);
    }
    let mut points = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let blocks = n / t;
        let sums: Vec<T> = if opts.overlapping {
            (0..=n - t).map(|s| prefix[s + t] - prefix[s]).collect()
        } else {
            (0..blocks).map(|b| prefix[(b + 1) * t] - prefix[b * t]).collect()
        };
        let m = T::from_usize_lossy(sums.len());
        let mu = sums.iter().copied().sum::<T>() / m;
        let v = sums.iter().map(|&s| (s - mu) * (s - mu)).sum::<T>() / (m - T::one());
        if !(v > T::zero()) {
            return Err(Error::DegenerateRegression(format!(
                "block sums of length {t} have zero variance"
            )));
        }
        points.push((t, v));
    }
    let x: Vec<T> = points.iter().map(|&(t, _)| T::from_usize_lossy(t).ln()).collect();
    let y: Vec<T> = points.iter().map(|&(_, v)| v.ln()).collect();
    let line = fit_line(&x, &y).ok_or_else(|| Error::DegenerateRegression("t grid has no spread".into()))?;
    Ok(VtReport {
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        points,
    })
}

pub fn vt_scaling<T: Real>(series: &VolSeries<T>, t_grid: &[usize], opts: VtOptions) -> Result<VtReport<T>> {
    vt_scaling_values(&series.variances(), t_grid, opts)
}

/// Weights of `(1 − L)^d`: `π_0 = 1`, `π_j = π_{j−1} (j − 1 − d) / j`.
pub fn frac_diff_weights<T: Real>(d: T, count: usize) -> Vec<T> {
    let mut w = Vec::with_capacity(count);
    let mut cur = T::one();
    for j in 0..count {
        if j > 0 {
            let jf = T::from_usize_lossy(j);
            cur = cur * (jf - T::one() - d) / jf;
        }
        w.push(cur);
    }
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FracDiff<T> {
    pub d: T,
    /// `π_0..=π_L`.
    pub weights: Vec<T>,
    /// `Σ_{j>L} |π_j|`, the weight discarded by truncating at `L`.
    pub tail_mass: T,
    /// Set when `tail_mass` exceeds [`TAIL_MASS_WARNING`].
    pub tail_warning: bool,
    /// Output `ε_t` for `t = L..N`, i.e. `N − L` values.
    pub values: Vec<T>,
}

/// `(1 − L)^d x` with the filter truncated after `truncation` lags.
pub fn frac_diff<T: Real>(x: &[T], d: T, truncation: usize) -> Result<FracDiff<T>> {
    if !(d >= T::zero() && d <= T::one()) {
        return Err(invalid(format!("d must lie in [0,1], got {d}")));
    }
    let n = x.len();
    if n <= truncation {
        return Err(Error::SeriesTooShort {
            required: truncation + 1,
            actual: n,
        });
    }
    let weights = frac_diff_weights(d, truncation + 1);
    // For d in (0,1] the weights beyond π_0 are nonpositive and sum to −1.
    let tail_mass = if d == T::zero() {
        T::zero()
    } else {
        (T::one() - weights[1..].iter().map(|w| w.abs()).sum::<T>()).max(T::zero())
    };
    let values = (truncation..n)
        .map(|t| weights.iter().enumerate().map(|(j, &w)| w * x[t - j]).sum())
        .collect();
    Ok(FracDiff {
        d,
        tail_warning: tail_mass > T::lit(TAIL_MASS_WARNING),
        weights,
        tail_mass,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct AcfReport<T> {
    pub n: usize,
    pub lags: Vec<usize>,
    pub acf: Vec<T>,
    /// Half-width `1.96 / √N`.
    pub bartlett_band: T,
    /// Share of lags `1..=max_lag` with `|acf| ≤ band`.
    pub inside_fraction: T,
}

impl<T: Real> AcfReport<T> {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "lag,acf,band")?;
        for (l, a) in self.lags.iter().zip(&self.acf) {
            writeln!(out, "{l},{a},{}", self.bartlett_band)?;
        }
        Ok(())
    }
}

/// Sample autocorrelations at lags `0..=max_lag` with white-noise bands.
pub fn acf_with_bands<T: Real>(x: &[T], max_lag: usize) -> Result<AcfReport<T>> {
    let n = x.len();
    if n <= max_lag {
        return Err(Error::SeriesTooShort {
            required: max_lag + 1,
            actual: n,
        });
    }
    let nf = T::from_usize_lossy(n);
    let mu = x.iter().copied().sum::<T>() / nf;
    let dev: Vec<T> = x.iter().map(|&v| v - mu).collect();
    let c0 = dev.iter().map(|&v| v * v).sum::<T>();
    if !(c0 > T::zero()) {
        return Err(Error::DegenerateRegression("constant series has no autocorrelation".into()));
    }
    let lags: Vec<usize> = (0..=max_lag).collect();
    let acf: Vec<T> = lags
        .iter()
        .map(|&l| {
            if l == 0 {
                T::one()
            } else {
                (0..n - l).map(|k| dev[k] * dev[k + l]).sum::<T>() / c0
            }
        })
        .collect();
    let band = T::lit(1.96) / nf.sqrt();
    let inside = acf[1..].iter().filter(|a| a.abs() <= band).count();
    let inside_fraction = if max_lag == 0 {
        T::one()
    } else {
        T::from_usize_lossy(inside) / T::from_usize_lossy(max_lag)
    };
    Ok(AcfReport {
        n,
        lags,
        acf,
        bartlett_band: band,
        inside_fraction,
    })
}
