use rayon::prelude::*;

use super::{fbm::FbmGenerator, uniform_times, FouParams, GaussianPath, PathParams};
use crate::error::{invalid, Result};
use crate::num::Real;
use crate::rng::path_rng;

/// Euler recursion `X_{k+1} = X_k + ν ΔW_k + α dt (m − X_k)` driven by the
/// fBM increments `fbm_increments`.
pub fn fou_from_fbm<T: Real>(params: &FouParams<T>, fbm_increments: &[T]) -> Result<Vec<T>> {
    params.validate()?;
    if fbm_increments.len() + 1 != params.fbm.n_points {
        return Err(invalid(format!(
            "expected {} increments, got {}",
            params.fbm.n_points - 1,
            fbm_increments.len()
        )));
    }
    let pull = params.alpha * params.fbm.dt;
    let mut x = params.x0;
    let mut out = Vec::with_capacity(params.fbm.n_points);
    out.push(x);
    for &dw in fbm_increments {
        x = x + params.nu * dw + pull * (params.mean_level - x);
        out.push(x);
    }
    Ok(out)
}

/// One fOU path. Uses the same random stream as `fbm_simulate` with the same
/// seed, so the two are pathwise coupled.
pub fn fou_simulate<T: Real>(params: &FouParams<T>) -> Result<GaussianPath<T>> {
    params.validate()?;
    let f = &params.fbm;
    let gen = FbmGenerator::new(f.hurst, f.n_points, f.dt)?;
    let incs = gen.increments(&mut path_rng(f.seed, 0));
    Ok(GaussianPath {
        times: uniform_times(f.n_points, f.dt),
        values: fou_from_fbm(params, &incs)?,
        params: PathParams::Fou(*params),
    })
}

/// `count` fOU paths from streams `0..count` of the seed; path 0 equals
/// [`fou_simulate`].
pub fn fou_simulate_batch<T: Real>(params: &FouParams<T>, count: usize) -> Result<Vec<GaussianPath<T>>> {
    params.validate()?;
    let f = &params.fbm;
    let gen = FbmGenerator::new(f.hurst, f.n_points, f.dt)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let incs = gen.increments(&mut path_rng(f.seed, i));
            Ok(GaussianPath {
                times: uniform_times(f.n_points, f.dt),
                values: fou_from_fbm(params, &incs)?,
                params: PathParams::Fou(*params),
            })
        })
        .collect()
}
