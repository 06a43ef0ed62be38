//! Rough fractional stochastic volatility: simulation, scaling estimation,
//! covariance structure, forecasting, memory diagnostics and a Hawkes
//! order-flow simulator.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the common `f64` and `f32` instantiations.

pub mod covstruct;
pub mod error;
pub mod forecast;
pub mod fracproc;
pub mod linalg;
pub mod memdiag;
pub mod microsim;
pub mod num;
pub mod quad;
pub mod rng;
pub mod scaling;
pub mod special;

pub use error::{Error, ErrorKind, Result};
pub use num::{fit_line, LineFit, Real};
pub use rng::path_rng;

pub type GaussianPathF64 = fracproc::GaussianPath<f64>;
pub type GaussianPathF32 = fracproc::GaussianPath<f32>;
pub type FbmParamsF64 = fracproc::FbmParams<f64>;
pub type FouParamsF64 = fracproc::FouParams<f64>;
pub type VolSeriesF64 = scaling::VolSeries<f64>;
pub type VolSeriesF32 = scaling::VolSeries<f32>;
pub type ScalingReportF64 = scaling::ScalingReport<f64>;
pub type ScalingReportF32 = scaling::ScalingReport<f32>;
pub type RfsvKernelF64 = forecast::RfsvKernel<f64>;
pub type ForecastRecordF64 = forecast::ForecastRecord<f64>;
pub type AcfReportF64 = memdiag::AcfReport<f64>;
pub type HawkesParamsF64 = microsim::HawkesParams<f64>;
pub type EventStreamF64 = microsim::EventStream<f64>;
