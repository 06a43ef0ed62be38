//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the toolkit can run on (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + FromStr
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + std::iter::Sum
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Relative tolerance that is meaningful at this precision.
    fn tol(requested: f64) -> Self {
        let floor = 64.0 * Self::epsilon().to_f64_lossy();
        Self::lit(requested.max(floor))
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Ordinary least squares fit of `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope.
    pub slope_stderr: T,
    pub r_squared: T,
}

/// Least-squares line through `(x, y)`. Returns `None` when `x` is degenerate
/// or fewer than two points are supplied.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Option<LineFit<T>> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = T::from_usize_lossy(n);
    let mx = x[..n].iter().copied().sum::<T>() / nf;
    let my = y[..n].iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (0..n)
        .map(|i| {
            let r = y[i] - intercept - slope * x[i];
            r * r
        })
        .sum::<T>();
    let slope_stderr = if n > 2 {
        (ss_res / (nf - T::lit(2.0)) / sxx).sqrt()
    } else {
        T::zero()
    };
    let r_squared = if syy > T::zero() {
        T::one() - ss_res / syy
    } else {
        T::one()
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
    })
}

pub(crate) fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_usize_lossy(xs.len())
}
