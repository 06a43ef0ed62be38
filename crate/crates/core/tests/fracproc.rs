use proptest::prelude::*;
use roughvol::fracproc::{
    fbm_covariance, fbm_simulate, fgn_autocovariance, fou_autocov, fou_autocov_closed_form, fou_from_fbm,
    fou_simulate, fou_variance, lognormal_vol_cov, simulate_batch, FbmGenerator, FbmParams, FouParams,
    LognormalMode,
};
use roughvol::path_rng;
use roughvol::special::{gamma, gaussian_abs_moment};

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn sample_covariance_matches_closed_form() {
    let n = 32;
    let paths = 100_000;
    for (h, seed) in [(0.14, 1u64), (0.7, 2)] {
        let gen = FbmGenerator::<f64>::new(h, n, 1.0).unwrap();
        let mut sum = vec![0.0; n * n];
        for i in 0..paths {
            let w = gen.sample_values(&mut path_rng(seed, i));
            for a in 1..n {
                for b in a..n {
                    sum[a * n + b] += w[a] * w[b];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for a in 1..n {
            for b in a..n {
                let exact = fbm_covariance(h, a as f64, b as f64);
                let est = sum[a * n + b] / paths as f64;
                let va = fbm_covariance(h, a as f64, a as f64);
                let vb = fbm_covariance(h, b as f64, b as f64);
                let se = ((va * vb + exact * exact) / paths as f64).sqrt();
                worst = worst.max((est - exact).abs() / se);
            }
        }
        assert!(worst < 4.0, "H {h}: worst deviation {worst} standard errors");
    }
}

#[test]
fn three_point_grid_covariance() {
    // Cov(W_1, W_2) = (1 + 2^{1.5} − 1)/2 = √2 at H = 0.75.
    let exact = fbm_covariance(0.75, 1.0, 2.0);
    assert!((exact - 2f64.sqrt()).abs() < 1e-14);
    let gen = FbmGenerator::<f64>::new(0.75, 3, 1.0).unwrap();
    let mut rng = path_rng(9, 0);
    let prods: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let w = gen.sample_values(&mut rng);
            w[1] * w[2]
        })
        .collect();
    let (m, se) = mean_se(&prods);
    assert!((m - exact).abs() < 4.0 * se, "{m} vs {exact} (se {se})");
}

#[test]
fn brownian_increments_are_uncorrelated() {
    let p = fbm_simulate(&FbmParams::new(0.5, 1 << 16, 1.0, 3).unwrap()).unwrap();
    let inc: Vec<f64> = p.values.windows(2).map(|w| w[1] - w[0]).collect();
    let n = inc.len() as f64;
    let m = inc.iter().sum::<f64>() / n;
    let c0: f64 = inc.iter().map(|x| (x - m) * (x - m)).sum();
    let c1: f64 = inc.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    assert!((c1 / c0).abs() < 4.0 / n.sqrt());
}

#[test]
fn second_moment_scales_as_power_of_lag() {
    let paths = 8;
    let n = 1 << 16;
    let gen = FbmGenerator::<f64>::new(0.14, n, 1.0).unwrap();
    let per_path: Vec<Vec<f64>> = (0..paths)
        .map(|i| {
            let w = gen.sample_values(&mut path_rng(21, i));
            (1..=30)
                .map(|d| {
                    let s: f64 = (0..n - d).map(|k| (w[k + d] - w[k]).powi(2)).sum();
                    s / (n - d) as f64
                })
                .collect()
        })
        .collect();
    for d in 1..=30 {
        let xs: Vec<f64> = per_path.iter().map(|r| r[d - 1]).collect();
        let (m, se) = mean_se(&xs);
        let exact = (d as f64).powf(0.28);
        assert!((m - exact).abs() < 4.0 * se + 1e-3, "Δ {d}: {m} vs {exact}");
    }
}

#[test]
fn batch_output_is_independent_of_thread_count() {
    let p = FbmParams::new(0.14, 4097, 1.0, 77).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| simulate_batch(&p, 6).unwrap());
    let b = four.install(|| simulate_batch(&p, 6).unwrap());
    assert_eq!(a, b);
}

fn fou(alpha: f64, seed: u64, n: usize, dt: f64) -> FouParams<f64> {
    FouParams {
        fbm: FbmParams::new(0.14, n, dt, seed).unwrap(),
        nu: 0.3,
        alpha,
        mean_level: -5.0,
        x0: -5.0,
    }
}

#[test]
fn small_reversion_converges_to_scaled_fbm() {
    // E[sup_{t≤T} |X^α_t − X_0 − ν W_t|] on shared draws, T = 10 days.
    let n = 1001;
    let dt = 0.01;
    let gen = FbmGenerator::<f64>::new(0.14, n, dt).unwrap();
    let mut means = Vec::new();
    for alpha in [1e-1, 1e-2, 1e-3] {
        let p = fou(alpha, 0, n, dt);
        let sups: Vec<f64> = (0..200)
            .map(|i| {
                let inc = gen.increments(&mut path_rng(5, i));
                let x = fou_from_fbm(&p, &inc).unwrap();
                let mut w = 0.0;
                let mut sup: f64 = 0.0;
                for k in 0..n {
                    if k > 0 {
                        w += inc[k - 1];
                    }
                    sup = sup.max((x[k] - x[0] - 0.3 * w).abs());
                }
                sup
            })
            .collect();
        means.push(mean_se(&sups).0);
    }
    assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
    assert!(means[2] < 0.02 * means[0], "{means:?}");
}

#[test]
fn increment_moments_approach_fbm_as_reversion_vanishes() {
    // Exact Gaussian moments: E|X_{t+Δ} − X_t|^q = K_q (2 (Var − Cov(Δ)))^{q/2}.
    for q in [1.0f64, 2.0] {
        for lag in [1.0f64, 5.0] {
            let target = 0.3f64.powf(q) * gaussian_abs_moment(q) * lag.powf(q * 0.14);
            let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&a| {
                    let m2 = 2.0 * (fou_variance(0.14, 0.3, a).unwrap() - fou_autocov(0.14, 0.3, a, lag).unwrap());
                    (gaussian_abs_moment(q) * m2.powf(q / 2.0) - target).abs() / target
                })
                .collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "q {q} Δ {lag}: {errs:?}");
            assert!(errs[2] < 1e-3);
        }
    }
    // Monte Carlo on simulated paths with α = 10⁻⁴.
    let n = 2001;
    for (q, lag) in [(1.0, 1usize), (2.0, 5)] {
        let vals: Vec<f64> = (0..40)
            .map(|s| {
                let x = fou_simulate(&fou(1e-4, 100 + s, n, 1.0)).unwrap().values;
                (0..n - lag).map(|k| (x[k + lag] - x[k]).abs().powf(q)).sum::<f64>() / (n - lag) as f64
            })
            .collect();
        let (m, se) = mean_se(&vals);
        let target = 0.3f64.powf(q) * gaussian_abs_moment(q) * (lag as f64).powf(q * 0.14);
        assert!((m - target).abs() < 4.0 * se + 0.01 * target, "q {q} Δ {lag}: {m} vs {target}");
    }
}

#[test]
fn strong_reversion_gives_ou_variance() {
    // α = 100, H = 1/2: stationary variance ν²/(2α). The Euler scheme with
    // αδ = 0.01 inflates it by 1/(1 − αδ/2) ≈ 0.5%.
    let n = 1 << 17;
    let vars: Vec<f64> = (0..8)
        .map(|s| {
            let p = FouParams {
                fbm: FbmParams::new(0.5, n, 1e-4, 40 + s).unwrap(),
                nu: 1.0,
                alpha: 100.0,
                mean_level: 0.0,
                x0: 0.0,
            };
            let x = fou_simulate(&p).unwrap().values;
            let tail = &x[n / 10..];
            let m = tail.iter().sum::<f64>() / tail.len() as f64;
            tail.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / tail.len() as f64
        })
        .collect();
    let (m, se) = mean_se(&vars);
    let exact = 1.0 / 200.0;
    assert!((m - exact).abs() < 4.0 * se + 0.006 * exact, "{m} vs {exact} (se {se})");
}

#[test]
fn autocov_tends_to_variance_minus_half_structure_function() {
    let (h, nu, lag) = (0.14, 0.3, 10.0f64);
    let errs: Vec<f64> = [1e-2, 1e-3, 5e-4, 1e-4]
        .iter()
        .map(|&a| {
            let var = fou_variance(h, nu, a).unwrap();
            (fou_autocov(h, nu, a, lag).unwrap() - (var - 0.5 * nu * nu * lag.powf(2.0 * h))).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[3] < 1e-3, "{errs:?}");
}

#[test]
fn spectral_and_closed_forms_agree_just_above_half() {
    for lag in [0.1f64, 1.0, 10.0] {
        let s = fou_autocov(0.53, 0.3, 0.5, lag).unwrap();
        let c = fou_autocov_closed_form(0.53, 0.3, 0.5, lag).unwrap();
        assert!(((s - c) / c).abs() < 1e-6, "lag {lag}: {s} vs {c}");
    }
    // lag 0 reduces to H(2H−1) ν² α^{−2H} Γ(2H−1)
    let h = 0.53;
    let v = h * (2.0 * h - 1.0) * 0.09 * 0.5f64.powf(-2.0 * h) * gamma(2.0 * h - 1.0);
    assert!(((fou_autocov(h, 0.3, 0.5, 0.0).unwrap() - v) / v).abs() < 1e-8);
}

#[test]
fn lognormal_second_moment_limits() {
    let (h, nu, a, m): (f64, f64, f64, f64) = (0.14, 0.3, 5e-4, -5.0);
    let var = fou_variance(h, nu, a).unwrap();
    let at0 = lognormal_vol_cov(h, nu, a, m, 0.0, LognormalMode::Exact).unwrap();
    assert!(((at0 - (2.0 * m + 2.0 * var).exp()) / at0).abs() < 1e-10);
    for lag in [0.0, 3.0, 50.0] {
        let v = lognormal_vol_cov(h, 1e-8, a, m, lag, LognormalMode::Exact).unwrap();
        assert!(((v - (2.0 * m).exp()) / v).abs() < 1e-12);
    }
}

#[test]
fn log_vol_covariance_is_affine_in_power_of_lag() {
    let (h, nu, a, m): (f64, f64, f64, f64) = (0.14, 0.3, 5e-4, -5.0);
    let lags: Vec<f64> = (1..=100).map(|d| d as f64).collect();
    let x: Vec<f64> = lags.iter().map(|l| l.powf(2.0 * h)).collect();
    let y: Vec<f64> = lags
        .iter()
        .map(|&l| lognormal_vol_cov(h, nu, a, m, l, LognormalMode::Exact).unwrap().ln())
        .collect();
    let fit = roughvol::fit_line(&x, &y).unwrap();
    assert!(fit.r_squared > 0.9999, "{fit:?}");
    assert!((fit.slope + nu * nu / 2.0).abs() < 0.02 * nu * nu / 2.0, "{fit:?}");
    // The log-log view is visibly curved: no single power law fits.
    let lx: Vec<f64> = lags.iter().map(|l| l.ln()).collect();
    let cov: Vec<f64> = lags
        .iter()
        .map(|&l| {
            lognormal_vol_cov(h, nu, a, m, l, LognormalMode::Exact).unwrap()
                - (2.0 * m + fou_variance(h, nu, a).unwrap()).exp().powi(1)
        })
        .collect();
    assert!(cov.iter().all(|&c| c > 0.0));
    let ly: Vec<f64> = cov.iter().map(|c| c.ln()).collect();
    let loglog = roughvol::fit_line(&lx, &ly).unwrap();
    assert!(loglog.r_squared < fit.r_squared);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn paths_start_at_zero_on_a_uniform_grid(h in 0.02f64..0.98, n in 2usize..300, dt in 0.01f64..5.0, seed in any::<u64>()) {
        let p = fbm_simulate(&FbmParams::new(h, n, dt, seed).unwrap()).unwrap();
        prop_assert_eq!(p.values.len(), n);
        prop_assert_eq!(p.values[0], 0.0);
        prop_assert!(p.values.iter().all(|v| v.is_finite()));
        for (k, t) in p.times.iter().enumerate() {
            prop_assert!((t - k as f64 * dt).abs() <= 1e-12 * (1.0 + t.abs()));
        }
    }

    #[test]
    fn fgn_autocovariance_is_a_correlation(h in 0.01f64..0.99, k in 0usize..10_000) {
        let g = fgn_autocovariance(h, k);
        prop_assert!(g.abs() <= 1.0 + 1e-12);
        prop_assert_eq!(fgn_autocovariance(h, 0), 1.0);
        // sign of the correlation follows H − 1/2
        if k > 0 && (h - 0.5).abs() > 1e-3 {
            prop_assert_eq!(g > 0.0, h > 0.5);
        }
    }

    #[test]
    fn no_reversion_means_scaled_fbm(h in 0.05f64..0.95, nu in 0.01f64..2.0, x0 in -10.0f64..10.0, seed in any::<u64>()) {
        let fbm = FbmParams::new(h, 64, 1.0, seed).unwrap();
        let p = FouParams { fbm, nu, alpha: 0.0, mean_level: 3.0, x0 };
        let x = fou_simulate(&p).unwrap().values;
        let w = fbm_simulate(&fbm).unwrap().values;
        for (a, b) in x.iter().zip(&w) {
            prop_assert!((a - (x0 + nu * b)).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }
}
