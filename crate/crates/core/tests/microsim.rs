use rand::Rng;
use rand_distr::{Distribution, Poisson};
use roughvol::microsim::{
    bin_counts, coarse_grain_to_vol, cumulative_flow_hurst, exp_sum_kernel, hawkes_simulate, hawkes_simulate_batch,
    read_event_times, HawkesParams, Kernel,
};
use roughvol::scaling::default_delta_grid;
use roughvol::{path_rng, Error};

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn poisson_counts() {
    let p = HawkesParams::new(5.0, Kernel::Zero, 1e4, 1).unwrap();
    let s = hawkes_simulate(&p).unwrap();
    assert!((s.len() as f64 - 5e4).abs() < 4.0 * 5e4f64.sqrt());
    assert!(s.jump_times.windows(2).all(|w| w[0] < w[1]));
    let counts: Vec<f64> = bin_counts(&s, 10.0).unwrap().iter().map(|&c| c as f64).collect();
    let (m, sd) = mean_sd(&counts);
    // index of dispersion of Poisson counts is one; its SE is about sqrt(2/n)
    let dispersion = sd * sd / m;
    assert!((dispersion - 1.0).abs() < 4.0 * (2.0f64 / counts.len() as f64).sqrt(), "{dispersion}");
    assert_eq!(s.kernel_components, 0);
}

#[test]
fn exponential_kernel_rate() {
    let p = HawkesParams::new(1.0, Kernel::Exponential { a: 0.5, b: 1.0 }, 1000.0, 2).unwrap();
    assert_eq!(p.stationary_rate(), 2.0);
    let rates: Vec<f64> = hawkes_simulate_batch(&p, 200)
        .unwrap()
        .iter()
        .map(|s| s.len() as f64 / 1000.0)
        .collect();
    let (m, sd) = mean_sd(&rates);
    assert!((m - 2.0).abs() < 3.0 * sd / (rates.len() as f64).sqrt(), "{m} ± {sd}");
}

#[test]
fn exponential_sum_matches_power_law() {
    let k = Kernel::power_law_with_norm(0.98f64, 1.6, 1e-3);
    let es = exp_sum_kernel(&k, 1e4, 1e-6).unwrap();
    assert!(es.max_relative_error <= 1e-6);
    let mut rng = path_rng(5, 0);
    for _ in 0..2000 {
        let t = 10f64.powf(rng.gen_range(-6.0..4.0));
        assert!((es.value(t) / k.value(t) - 1.0).abs() <= 1e-6, "t {t}");
    }
    assert!((es.l1_norm() - 0.98).abs() < 1e-3);
}

/// Cluster representation: immigrants at rate μ, each event begets
/// Poisson(‖φ‖₁) children at delays drawn from `φ/‖φ‖₁`.
fn branching_power_law(mu: f64, norm: f64, beta: f64, t0: f64, horizon: f64, seed: u64) -> Vec<f64> {
    let mut rng = path_rng(seed, 1_000_000);
    let n_imm = Poisson::new(mu * horizon).unwrap().sample(&mut rng) as usize;
    let mut gen: Vec<f64> = (0..n_imm).map(|_| rng.gen_range(0.0..horizon)).collect();
    let mut all = gen.clone();
    let kids = Poisson::new(norm).unwrap();
    while !gen.is_empty() {
        let mut next = Vec::new();
        for &parent in &gen {
            for _ in 0..kids.sample(&mut rng) as usize {
                let u: f64 = rng.gen();
                let t = parent + t0 * ((1.0 - u).powf(-1.0 / (beta - 1.0)) - 1.0);
                if t < horizon {
                    next.push(t);
                }
            }
        }
        all.extend(&next);
        gen = next;
    }
    all.sort_by(f64::total_cmp);
    all
}

#[test]
fn thinning_agrees_with_branching() {
    let (mu, norm, beta, t0, horizon) = (1.0, 0.7, 1.6, 0.05, 500.0);
    let runs = 200;
    let p = HawkesParams::new(mu, Kernel::power_law_with_norm(norm, beta, t0), horizon, 11).unwrap();
    let thinned = hawkes_simulate_batch(&p, runs).unwrap();
    let stats = |ev: &[f64]| {
        let short = ev.windows(2).filter(|w| w[1] - w[0] < t0).count() as f64;
        (ev.len() as f64, short / ev.len().max(2) as f64)
    };
    let a: Vec<(f64, f64)> = thinned.iter().map(|s| stats(&s.jump_times)).collect();
    let b: Vec<(f64, f64)> = (0..runs as u64)
        .map(|i| stats(&branching_power_law(mu, norm, beta, t0, horizon, i)))
        .collect();
    for pick in [|x: &(f64, f64)| x.0, |x: &(f64, f64)| x.1] {
        let (ma, sa) = mean_sd(&a.iter().map(pick).collect::<Vec<_>>());
        let (mb, sb) = mean_sd(&b.iter().map(pick).collect::<Vec<_>>());
        let se = ((sa * sa + sb * sb) / runs as f64).sqrt();
        assert!((ma - mb).abs() < 4.0 * se, "{ma} vs {mb} (se {se})");
    }
}

#[test]
fn deterministic_streams() {
    let p = HawkesParams::new(2.0, Kernel::power_law_with_norm(0.9, 1.6, 1e-2), 200.0, 42).unwrap();
    let a = hawkes_simulate(&p).unwrap();
    let b = hawkes_simulate(&p).unwrap();
    assert_eq!(a, b);
    assert_eq!(hawkes_simulate_batch(&p, 3).unwrap()[0], a);
    let mut csv = Vec::new();
    a.write_csv(&mut csv).unwrap();
    let back: Vec<f64> = read_event_times(csv.as_slice()).unwrap();
    assert_eq!(back, a.jump_times);
    assert!(matches!(
        read_event_times::<f64, _>("t\n1\n".as_bytes()),
        Err(Error::Format(_))
    ));
}

#[test]
fn guards() {
    assert!(matches!(
        HawkesParams::new(1.0, Kernel::Exponential { a: 1.0, b: 1.0 }, 10.0, 0),
        Err(Error::UnstableKernel(_))
    ));
    let mut p = HawkesParams::new(50.0, Kernel::Zero, 100.0, 0).unwrap();
    p.event_budget = 100;
    assert!(matches!(hawkes_simulate(&p), Err(Error::EventBudgetExceeded(100))));
    let s = hawkes_simulate(&HawkesParams::new(1.0, Kernel::Zero, 50.0, 0).unwrap()).unwrap();
    assert!(matches!(bin_counts(&s, 1.0), Err(Error::TooFewBlocks { .. })));
}

#[test]
fn poisson_flow_is_diffusive() {
    let p = HawkesParams::new(2.0, Kernel::Zero, 1e4, 3).unwrap();
    let s = hawkes_simulate(&p).unwrap();
    let h: f64 = cumulative_flow_hurst(&s, 10.0, &default_delta_grid()).unwrap();
    assert!((h - 0.5).abs() < 0.1, "{h}");
    let cg = coarse_grain_to_vol(&s, 10.0).unwrap();
    assert_eq!(cg.series.len(), 1000);
    assert_eq!(cg.floored_bins, 0);
    let sparse = hawkes_simulate(&HawkesParams::new(0.05, Kernel::Zero, 1e4, 3).unwrap()).unwrap();
    let cg = coarse_grain_to_vol(&sparse, 10.0).unwrap();
    assert!(cg.floored_bins > 0);
    assert!(cg.series.values().iter().all(|&v| v >= 0.5));
}
