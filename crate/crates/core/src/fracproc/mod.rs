//! Exact simulation of fractional Brownian motion and fractional
//! Ornstein–Uhlenbeck paths, and the theoretical covariances of both.

mod covariance;
mod fbm;
mod fou;
mod io;

pub use covariance::{
    fbm_covariance, fgn_autocovariance, fou_autocov, fou_autocov_closed_form, fou_variance,
    lognormal_vol_cov, LognormalMode,
};
pub use fbm::{fbm_simulate, simulate_batch, FbmGenerator};
pub use fou::{fou_from_fbm, fou_simulate, fou_simulate_batch};
pub use io::{read_binary, read_csv, write_binary, write_csv};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FbmParams<T> {
    pub hurst: T,
    pub n_points: usize,
    /// Grid spacing, in days.
    pub dt: T,
    pub seed: u64,
}

impl<T: Real> FbmParams<T> {
    pub fn new(hurst: T, n_points: usize, dt: T, seed: u64) -> Result<Self> {
        let p = Self {
            hurst,
            n_points,
            dt,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > T::zero() && self.hurst < T::one()) {
            return Err(invalid(format!("hurst must lie in (0,1), got {}", self.hurst)));
        }
        if self.n_points < 2 {
            return Err(invalid("n_points must be at least 2"));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Parameters of `dX = ν dW^H − α (X − m) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FouParams<T> {
    pub fbm: FbmParams<T>,
    pub nu: T,
    /// Mean reversion per unit time; zero gives pure fBM dynamics.
    pub alpha: T,
    pub mean_level: T,
    pub x0: T,
}

impl<T: Real> FouParams<T> {
    pub fn validate(&self) -> Result<()> {
        self.fbm.validate()?;
        if !(self.nu > T::zero()) {
            return Err(invalid(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.alpha >= T::zero()) {
            return Err(invalid(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if !self.mean_level.is_finite() || !self.x0.is_finite() {
            return Err(invalid("mean level and initial value must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub enum PathParams<T> {
    Fbm(FbmParams<T>),
    Fou(FouParams<T>),
}

/// A simulated path on a uniform grid starting at time zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GaussianPath<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub params: PathParams<T>,
}

impl<T: Real> GaussianPath<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Every `stride`-th value, starting at index `offset`.
    pub fn subsample(&self, offset: usize, stride: usize) -> Vec<T> {
        self.values.iter().skip(offset).step_by(stride.max(1)).copied().collect()
    }
}

pub(crate) fn uniform_times<T: Real>(n: usize, dt: T) -> Vec<T> {
    (0..n).map(|k| T::from_usize_lossy(k) * dt).collect()
}
