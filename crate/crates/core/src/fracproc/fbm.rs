use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::covariance::fgn_autocovariance;
use super::{uniform_times, FbmParams, GaussianPath, PathParams};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::path_rng;

/// Attempts at doubling the embedding before giving up.
const MAX_DOUBLINGS: usize = 4;

/// Circulant-embedding sampler for fBM on a fixed grid.
///
/// The square-rooted eigenvalues of the embedding are computed once, so
/// repeated draws cost two FFT-sized passes each.
pub struct FbmGenerator<T: Real> {
    hurst: T,
    n_points: usize,
    dt: T,
    /// `sqrt(λ_k / m)` for the circulant of size `m`.
    sqrt_eig: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for FbmGenerator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmGenerator")
            .field("hurst", &self.hurst)
            .field("n_points", &self.n_points)
            .field("embedding", &self.sqrt_eig.len())
            .finish()
    }
}

impl<T: Real> FbmGenerator<T> {
    pub fn new(hurst: T, n_points: usize, dt: T) -> Result<Self> {
        FbmParams::new(hurst, n_points, dt, 0)?;
        let n = n_points - 1;
        let mut m = (2 * n).next_power_of_two().max(2);
        let mut planner = FftPlanner::new();
        let mut last_min = 0.0;
        for _ in 0..=MAX_DOUBLINGS {
            let fft = planner.plan_fft_forward(m);
            let half = m / 2;
            let mut row = vec![Complex::new(T::zero(), T::zero()); m];
            for k in 0..=half {
                let g = fgn_autocovariance(hurst, k);
                row[k].re = g;
                if k > 0 && k < half {
                    row[m - k].re = g;
                }
            }
            fft.process(&mut row);
            let max = row.iter().fold(T::zero(), |a, c| a.max(c.re));
            let min = row.iter().fold(T::infinity(), |a, c| a.min(c.re));
            // Round-off may push exact zeros slightly negative.
            let slack = T::tol(1e-12) * max;
            if min >= -slack {
                let mf = T::from_usize_lossy(m);
                let sqrt_eig = row.iter().map(|c| (c.re.max(T::zero()) / mf).sqrt()).collect();
                return Ok(Self {
                    hurst,
                    n_points,
                    dt,
                    sqrt_eig,
                    fft,
                });
            }
            last_min = min.to_f64_lossy();
            m *= 2;
        }
        Err(Error::EmbeddingNotNonnegative {
            min_eigenvalue: last_min,
            size: m / 2,
        })
    }

    pub fn hurst(&self) -> T {
        self.hurst
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn embedding_size(&self) -> usize {
        self.sqrt_eig.len()
    }

    /// Two independent unit-grid fGn sequences of length `n_points - 1`
    /// (real and imaginary parts of the same transform).
    pub fn unit_increment_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<T>, Vec<T>) {
        let mut w: Vec<Complex<T>> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex::new(s * T::lit(a), s * T::lit(b))
            })
            .collect();
        self.fft.process(&mut w);
        let n = self.n_points - 1;
        (
            w[..n].iter().map(|c| c.re).collect(),
            w[..n].iter().map(|c| c.im).collect(),
        )
    }

    /// fGn increments on the grid, scaled by `dt^H`.
    pub fn increments<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let scale = self.dt.powf(self.hurst);
        let (re, _) = self.unit_increment_pair(rng);
        re.into_iter().map(|x| x * scale).collect()
    }

    /// Path values with `W_0 = 0`.
    pub fn sample_values<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut values = Vec::with_capacity(self.n_points);
        values.push(T::zero());
        let mut acc = T::zero();
        for dx in self.increments(rng) {
            acc = acc + dx;
            values.push(acc);
        }
        values
    }

    pub fn sample(&self, seed: u64, index: u64) -> GaussianPath<T> {
        let mut rng = path_rng(seed, index);
        GaussianPath {
            times: uniform_times(self.n_points, self.dt),
            values: self.sample_values(&mut rng),
            params: PathParams::Fbm(FbmParams {
                hurst: self.hurst,
                n_points: self.n_points,
                dt: self.dt,
                seed,
            }),
        }
    }
}

/// One fBM path, drawn from stream 0 of `params.seed`.
pub fn fbm_simulate<T: Real>(params: &FbmParams<T>) -> Result<GaussianPath<T>> {
    let gen = FbmGenerator::new(params.hurst, params.n_points, params.dt)?;
    Ok(gen.sample(params.seed, 0))
}

/// `count` independent paths; path `i` uses stream `i` of `params.seed`, so
/// output is identical however the work is scheduled.
pub fn simulate_batch<T: Real>(params: &FbmParams<T>, count: usize) -> Result<Vec<GaussianPath<T>>> {
    let gen = FbmGenerator::new(params.hurst, params.n_points, params.dt)?;
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| gen.sample(params.seed, i))
        .collect())
}
