//! Hawkes order-flow simulation by Ogata thinning, and the coarse-graining
//! that turns event counts into a variance series.

use std::io::{BufRead, BufReader, Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::num::Real;
use crate::rng::path_rng;
use crate::scaling::{fit_scaling_log, Units, VolSeries};
use crate::special::gamma;

pub const DEFAULT_CUTOFF: f64 = 1e-3;
pub const DEFAULT_EVENT_BUDGET: usize = 20_000_000;
/// Relative accuracy targeted by the exponential-sum kernel representation.
pub const DEFAULT_KERNEL_TOLERANCE: f64 = 1e-6;
pub const MIN_BINS: usize = 100;
/// Count assigned to empty bins before taking logs.
pub const EMPTY_BIN_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub enum Kernel<T> {
    Zero,
    /// `a e^{−b t}`.
    Exponential { a: T, b: T },
    /// `a (t + t0)^{−β}`.
    PowerLaw { a: T, beta: T, t0: T },
}

impl<T: Real> Kernel<T> {
    /// Power-law kernel with the amplitude chosen to give L¹ norm `norm`.
    pub fn power_law_with_norm(norm: T, beta: T, t0: T) -> Self {
        Kernel::PowerLaw {
            a: norm * (beta - T::one()) * t0.powf(beta - T::one()),
            beta,
            t0,
        }
    }

    pub fn l1_norm(&self) -> T {
        match *self {
            Kernel::Zero => T::zero(),
            Kernel::Exponential { a, b } => a / b,
            Kernel::PowerLaw { a, beta, t0 } => a * t0.powf(T::one() - beta) / (beta - T::one()),
        }
    }

    pub fn value(&self, t: T) -> T {
        match *self {
            Kernel::Zero => T::zero(),
            Kernel::Exponential { a, b } => a * (-b * t).exp(),
            Kernel::PowerLaw { a, beta, t0 } => a * (t + t0).powf(-beta),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Kernel::Zero => true,
            Kernel::Exponential { a, b } => a >= T::zero() && b > T::zero(),
            Kernel::PowerLaw { a, beta, t0 } => a >= T::zero() && beta > T::one() && t0 > T::zero(),
        };
        if !ok {
            return Err(invalid(format!("invalid kernel {self:?}")));
        }
        let norm = self.l1_norm();
        if !(norm < T::one()) {
            return Err(Error::UnstableKernel(norm.to_f64_lossy()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct HawkesParams<T> {
    pub mu: T,
    pub kernel: Kernel<T>,
    pub horizon: T,
    pub seed: u64,
    /// Simulation aborts once this many events have been generated.
    pub event_budget: usize,
}

impl<T: Real> HawkesParams<T> {
    pub fn new(mu: T, kernel: Kernel<T>, horizon: T, seed: u64) -> Result<Self> {
        let p = Self {
            mu,
            kernel,
            horizon,
            seed,
            event_budget: DEFAULT_EVENT_BUDGET,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > T::zero()) {
            return Err(invalid("baseline intensity mu must be positive"));
        }
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(invalid("horizon must be positive"));
        }
        self.kernel.validate()
    }

    /// `μ / (1 − ‖φ‖₁)`.
    pub fn stationary_rate(&self) -> T {
        self.mu / (T::one() - self.kernel.l1_norm())
    }
}

/// `φ(t) ≈ Σ_k c_k e^{−s_k t}` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ExpSum<T> {
    pub rates: Vec<T>,
    pub amplitudes: Vec<T>,
    /// Largest relative kernel error observed on a dense check grid.
    pub max_relative_error: T,
}

impl<T: Real> ExpSum<T> {
    pub fn value(&self, t: T) -> T {
        self.rates
            .iter()
            .zip(&self.amplitudes)
            .map(|(&s, &c)| c * (-s * t).exp())
            .sum()
    }

    pub fn l1_norm(&self) -> T {
        self.rates.iter().zip(&self.amplitudes).map(|(&s, &c)| c / s).sum()
    }
}

fn check_grid<T: Real>(horizon: T, t0: T) -> Vec<T> {
    // Log-spaced in t + t0 from t0 to horizon + t0, plus t = 0.
    let lo = t0.ln();
    let hi = (horizon + t0).ln();
    let n = 4000;
    (0..=n)
        .map(|i| (lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n)).exp() - t0)
        .map(|t| t.max(T::zero()))
        .collect()
}

/// Exponential-sum representation of a kernel on `[0, horizon]`.
///
/// A power law comes from `y^{−β} = Γ(β)^{−1} ∫ e^{βu} exp(−e^u y) du`
/// discretized by the trapezoid rule in `u`, which converges geometrically
/// for this doubly-exponentially decaying integrand. Each node is one
/// exponential component, so the intensity needs O(components) work per
/// event instead of a sum over the full history.
pub fn exp_sum_kernel<T: Real>(kernel: &Kernel<T>, horizon: T, tol: T) -> Result<ExpSum<T>> {
    kernel.validate()?;
    let (a, beta, t0) = match *kernel {
        Kernel::Zero => {
            return Ok(ExpSum {
                rates: vec![],
                amplitudes: vec![],
                max_relative_error: T::zero(),
            })
        }
        Kernel::Exponential { a, b } => {
            return Ok(ExpSum {
                rates: vec![b],
                amplitudes: vec![a],
                max_relative_error: T::zero(),
            })
        }
        Kernel::PowerLaw { a, beta, t0 } => (a, beta, t0),
    };
    let tol = tol.max(T::tol(1e-12));
    let log_inv = -tol.ln();
    let y_max = horizon + t0;
    let u_min = -tol.ln().abs() / beta - y_max.ln() - T::one();
    let z_max = T::lit(2.0) * log_inv + T::lit(20.0);
    let u_max = (z_max / t0).ln();
    let gamma_beta = gamma(beta);
    let grid = check_grid(horizon, t0);
    let mut h = T::PI() * T::PI() / log_inv;
    for _ in 0..6 {
        let n = ((u_max - u_min) / h).ceil().to_usize().unwrap_or(1).max(1);
        let mut rates = Vec::with_capacity(n + 1);
        let mut amplitudes = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let u = u_min + h * T::from_usize_lossy(k);
            let s = u.exp();
            let c = a * h * (beta * u - s * t0).exp() / gamma_beta;
            if c > T::zero() {
                rates.push(s);
                amplitudes.push(c);
            }
        }
        let mut approx = ExpSum {
            rates,
            amplitudes,
            max_relative_error: T::zero(),
        };
        let err = grid
            .iter()
            .map(|&t| {
                let exact = kernel.value(t);
                ((approx.value(t) - exact) / exact).abs()
            })
            .fold(T::zero(), T::max);
        approx.max_relative_error = err;
        if err <= tol {
            return Ok(approx);
        }
        h = h * T::lit(0.7);
    }
    Err(Error::QuadratureNonconvergence {
        estimate: f64::NAN,
        error: tol.to_f64_lossy(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct EventStream<T> {
    pub jump_times: Vec<T>,
    pub params: HawkesParams<T>,
    /// Components of the intensity representation and its relative error
    /// bound (zero for exact kernels).
    pub kernel_components: usize,
    pub kernel_relative_error: T,
}

impl<T: Real> EventStream<T> {
    pub fn len(&self) -> usize {
        self.jump_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "time")?;
        for t in &self.jump_times {
            writeln!(out, "{t}")?;
        }
        Ok(())
    }
}

/// Reads a one-column `time` CSV written by [`EventStream::write_csv`].
pub fn read_event_times<T: Real, R: Read>(input: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "time" {
                return Err(Error::Format(format!("line 1: unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            line.trim()
                .parse::<T>()
                .map_err(|_| Error::Format(format!("line {}: bad time {line:?}", i + 1)))?,
        );
    }
    Ok(out)
}

fn thin<T: Real, R: Rng + ?Sized>(params: &HawkesParams<T>, ks: &ExpSum<T>, rng: &mut R) -> Result<Vec<T>> {
    let k = ks.rates.len();
    let mut state = vec![T::zero(); k];
    let mut times = Vec::new();
    let mut t = T::zero();
    // The intensity only decays between events, so its value just after the
    // current time bounds it until the next event.
    let mut bound = params.mu;
    loop {
        let e: f64 = Exp1.sample(rng);
        let dt = T::lit(e) / bound;
        t = t + dt;
        if t > params.horizon {
            break;
        }
        let mut excite = T::zero();
        for (s, &rate) in state.iter_mut().zip(&ks.rates) {
            *s = *s * (-rate * dt).exp();
            excite = excite + *s;
        }
        let lambda = params.mu + excite;
        let u: f64 = rng.gen();
        if T::lit(u) * bound <= lambda {
            if times.len() >= params.event_budget {
                return Err(Error::EventBudgetExceeded(params.event_budget));
            }
            times.push(t);
            for (s, &c) in state.iter_mut().zip(&ks.amplitudes) {
                *s = *s + c;
            }
            bound = lambda + ks.amplitudes.iter().copied().sum::<T>();
        } else {
            bound = lambda;
        }
    }
    Ok(times)
}

fn simulate_with<T: Real>(params: &HawkesParams<T>, ks: &ExpSum<T>, stream: u64) -> Result<EventStream<T>> {
    let times = thin(params, ks, &mut path_rng(params.seed, stream))?;
    Ok(EventStream {
        jump_times: times,
        params: *params,
        kernel_components: ks.rates.len(),
        kernel_relative_error: ks.max_relative_error,
    })
}

/// One event stream from stream 0 of `params.seed`.
pub fn hawkes_simulate<T: Real>(params: &HawkesParams<T>) -> Result<EventStream<T>> {
    params.validate()?;
    let ks = exp_sum_kernel(&params.kernel, params.horizon, T::lit(DEFAULT_KERNEL_TOLERANCE))?;
    simulate_with(params, &ks, 0)
}

/// `count` independent streams (stream `i` of `params.seed`), in parallel.
pub fn hawkes_simulate_batch<T: Real>(params: &HawkesParams<T>, count: usize) -> Result<Vec<EventStream<T>>> {
    params.validate()?;
    let ks = exp_sum_kernel(&params.kernel, params.horizon, T::lit(DEFAULT_KERNEL_TOLERANCE))?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate_with(params, &ks, i))
        .collect()
}

/// Events per bin over `[0, horizon)`.
pub fn bin_counts<T: Real>(stream: &EventStream<T>, bin: T) -> Result<Vec<usize>> {
    if !(bin > T::zero()) {
        return Err(invalid("bin width must be positive"));
    }
    let n_bins = (stream.params.horizon / bin).floor().to_usize().unwrap_or(0);
    if n_bins < MIN_BINS {
        return Err(Error::TooFewBlocks {
            required: MIN_BINS,
            actual: n_bins,
        });
    }
    let mut counts = vec![0usize; n_bins];
    for &t in &stream.jump_times {
        let i = (t / bin).floor().to_usize().unwrap_or(usize::MAX);
        if i < n_bins {
            counts[i] += 1;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CoarseGrained<T> {
    /// Per-bin counts as a variance-unit series.
    pub series: VolSeries<T>,
    /// Bins that were empty and floored.
    pub floored_bins: usize,
}

/// Bins event counts into a variance proxy; empty bins become
/// [`EMPTY_BIN_FLOOR`] events.
pub fn coarse_grain_to_vol<T: Real>(stream: &EventStream<T>, bin: T) -> Result<CoarseGrained<T>> {
    let counts = bin_counts(stream, bin)?;
    let floor = T::lit(EMPTY_BIN_FLOOR);
    let floored_bins = counts.iter().filter(|&&c| c == 0).count();
    let values = counts
        .iter()
        .map(|&c| if c == 0 { floor } else { T::from_usize_lossy(c) })
        .collect();
    Ok(CoarseGrained {
        series: VolSeries::from_values(values, Units::Var, "hawkes counts")?,
        floored_bins,
    })
}

/// Hurst exponent of the centered cumulative order flow, from the slope of
/// its second structure function over `delta_grid` bins. A Poisson stream
/// gives about 1/2.
pub fn cumulative_flow_hurst<T: Real>(stream: &EventStream<T>, bin: T, delta_grid: &[usize]) -> Result<T> {
    let counts = bin_counts(stream, bin)?;
    let n = T::from_usize_lossy(counts.len());
    let mean = T::from_usize_lossy(counts.iter().sum::<usize>()) / n;
    let mut acc = T::zero();
    let flow: Vec<T> = counts
        .iter()
        .map(|&c| {
            acc = acc + T::from_usize_lossy(c) - mean;
            acc
        })
        .collect();
    Ok(fit_scaling_log(&flow, "cumulative flow", &[T::lit(2.0)], delta_grid)?.hurst_hat)
}
