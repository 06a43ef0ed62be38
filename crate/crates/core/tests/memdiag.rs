use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use roughvol::fracproc::{fou_simulate, FbmGenerator, FbmParams, FouParams};
use roughvol::memdiag::{acf_with_bands, default_t_grid, frac_diff, frac_diff_weights, vt_scaling_values, VtOptions};
use roughvol::path_rng;
use roughvol::Error;

#[test]
fn iid_variance_scales_linearly() {
    let seeds = 10;
    let mut mean = 0.0;
    for s in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let v: Vec<f64> = (0..100_000).map(|_| Exp1.sample(&mut rng)).collect();
        let r = vt_scaling_values(&v, &default_t_grid(), VtOptions::default()).unwrap();
        mean += r.slope / seeds as f64;
    }
    assert!((mean - 1.0).abs() < 0.03, "{mean}");
}

#[test]
fn fgn_driven_variance_has_slope_two_h_plus_one() {
    // Daily variances whose running sum is an fBM with Hurst H + 1/2.
    for h in [0.1, 0.3] {
        let g = FbmGenerator::<f64>::new(h + 0.5, 1 << 15, 1.0).unwrap();
        let seeds = 20;
        let mut mean = 0.0;
        for s in 0..seeds {
            let noise = g.increments(&mut path_rng(77, s));
            let v: Vec<f64> = noise.iter().map(|z| 1.0 + 0.1 * z).collect();
            let r = vt_scaling_values(&v, &default_t_grid(), VtOptions::default()).unwrap();
            mean += r.slope / seeds as f64;
        }
        assert!((mean - (2.0 * h + 1.0)).abs() < 0.05, "H {h}: {mean}");
    }
}

#[test]
fn overlapping_blocks_agree_on_iid_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<f64> = (0..20_000).map(|_| Exp1.sample(&mut rng)).collect();
    let opts = VtOptions {
        overlapping: true,
        ..VtOptions::default()
    };
    let r = vt_scaling_values(&v, &default_t_grid(), opts).unwrap();
    assert!((r.slope - 1.0).abs() < 0.05);
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 51);
}

#[test]
fn vt_guards() {
    let short = vec![1.0f64; 400];
    assert!(matches!(
        vt_scaling_values(&short, &default_t_grid(), VtOptions::default()),
        Err(Error::TooFewBlocks { required: 10, actual: 8 })
    ));
    let flat = vec![2.0f64; 5000];
    assert!(matches!(
        vt_scaling_values(&flat, &default_t_grid(), VtOptions::default()),
        Err(Error::DegenerateRegression(_))
    ));
}

#[test]
fn frac_diff_limits() {
    let x: Vec<f64> = (0..50).map(|k| ((k * k) as f64).sin()).collect();
    let id = frac_diff(&x, 0.0, 10).unwrap();
    assert_eq!(id.values, x[10..].to_vec());
    assert_eq!(id.tail_mass, 0.0);
    let d1 = frac_diff(&x, 1.0, 10).unwrap();
    assert_eq!(d1.values.len(), 40);
    for (k, v) in d1.values.iter().enumerate() {
        assert!((v - (x[k + 10] - x[k + 9])).abs() < 1e-15);
    }
    // re-integrating the d = 1 output recovers the series on interior points
    let mut acc = x[9];
    for (k, v) in d1.values.iter().enumerate() {
        acc += v;
        assert!((acc - x[k + 10]).abs() < 1e-12);
    }
    assert!(matches!(frac_diff(&x, 0.4, 50), Err(Error::SeriesTooShort { .. })));
    assert!(frac_diff(&x, 1.5, 10).is_err());
}

#[test]
fn frac_diff_tail_mass() {
    let x = vec![0.0f64; 3000];
    let a = frac_diff(&x, 0.4, 100).unwrap();
    let b = frac_diff(&x, 0.4, 2000).unwrap();
    assert!(b.tail_mass < a.tail_mass && a.tail_mass > 0.0);
    // |π_j| ~ j^{−d−1} / |Γ(−d)|, so Σ_{j>L} |π_j| ~ L^{−d} / Γ(1 − d)
    let approx = 2000f64.powf(-0.4) / roughvol::special::gamma(0.6);
    assert!((b.tail_mass / approx - 1.0).abs() < 0.02, "{} {approx}", b.tail_mass);
    assert!(a.tail_warning && b.tail_warning);
}

#[test]
fn white_noise_acf_calibration() {
    let seeds = 20;
    let mut inside = 0.0;
    for s in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = acf_with_bands(&x, 50).unwrap();
        assert_eq!(r.acf[0], 1.0);
        assert!((r.bartlett_band - 0.0196).abs() < 1e-12);
        inside += r.inside_fraction / seeds as f64;
    }
    assert!((inside - 0.95).abs() < 0.02, "{inside}");
}

#[test]
fn rfsv_log_vol_acf_is_persistent() {
    let p = FouParams {
        fbm: FbmParams::new(0.14, 3500, 1.0, 8).unwrap(),
        nu: 0.3,
        alpha: 5e-4,
        mean_level: -5.0,
        x0: -5.0,
    };
    let x = fou_simulate(&p).unwrap().values;
    let r = acf_with_bands(&x, 100).unwrap();
    assert!(r.inside_fraction < 0.2, "{}", r.inside_fraction);
    assert!(r.acf[1..].iter().all(|&a| a > 0.0));
    assert!(matches!(acf_with_bands(&x[..50], 100), Err(Error::SeriesTooShort { .. })));
}

proptest! {
    #[test]
    fn weights_compose(d1 in 0.0f64..0.5, d2 in 0.0f64..0.5) {
        let a = frac_diff_weights(d1, 40);
        let b = frac_diff_weights(d2, 40);
        let ab = frac_diff_weights(d1 + d2, 40);
        prop_assert_eq!(a[0], 1.0);
        for k in 0..40 {
            let conv: f64 = (0..=k).map(|j| a[j] * b[k - j]).sum();
            prop_assert!((conv - ab[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_beyond_first_are_nonpositive(d in 0.0f64..=1.0) {
        let w = frac_diff_weights(d, 200);
        prop_assert!(w[1..].iter().all(|&v| v <= 0.0));
        prop_assert!(w[1..].iter().map(|v| v.abs()).sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn acf_bounded(xs in proptest::collection::vec(-10.0f64..10.0, 30..200)) {
        if let Ok(r) = acf_with_bands(&xs, 20) {
            prop_assert!(r.acf.iter().all(|a| a.abs() <= 1.0 + 1e-12));
            prop_assert!(r.inside_fraction >= 0.0 && r.inside_fraction <= 1.0);
        }
    }
}
