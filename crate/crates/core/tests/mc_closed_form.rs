mod support;

use edge3c::analytics::outage;
use edge3c::mc::{
    coverage_histogram, simulate_outage, simulate_success, truncation_radius, truncation_tail, TrialConfig,
};
use edge3c::{derive, optimal_policy, uniform_policy, zipf, Execution, SystemParams};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use support::oracles::simpson;

fn grid_params(m: f64, alpha: f64) -> SystemParams {
    let mut p = SystemParams::default();
    p.nakagami_m = m;
    p.pathloss = alpha;
    p.with_kappa_prime(1.0).unwrap()
}

#[test]
fn success_matches_closed_form_on_grid() {
    for m in [0.5, 1.0, 3.0] {
        for alpha in [3.0, 4.0] {
            for pc in [0.2, 1.0] {
                let p = grid_params(m, alpha);
                let kp = derive(&p).unwrap().kappa_prime;
                let est = simulate_success(pc, &p, &TrialConfig::new(100_000, 17), Execution::default()).unwrap();
                let exact = 1.0 - (-kp * pc).exp();
                assert!(
                    (est.mean - exact).abs() < 4.0 * est.stderr,
                    "m={m} α={alpha} p={pc}: {est:?} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn half_success_at_ln_two() {
    let p = SystemParams::default()
        .with_kappa_prime(std::f64::consts::LN_2)
        .unwrap();
    let est = simulate_success(1.0, &p, &TrialConfig::new(100_000, 4), Execution::default()).unwrap();
    assert!((est.mean - 0.5).abs() < 4.0 * est.stderr);
}

#[test]
fn outage_examples() {
    let exec = Execution::default();
    // Single dataset, always cached.
    let mut p = SystemParams::default().with_kappa_prime(1.3).unwrap();
    p.library_size = 1;
    p.cache_size = 1.0;
    let pop = zipf(1, 0.8);
    let pol = uniform_policy(1, 1.0).unwrap();
    let est = simulate_outage(&pol, &pop, &p, &TrialConfig::new(50_000, 1), exec).unwrap();
    assert!((est.mean - (-1.3f64).exp()).abs() < 4.0 * est.stderr);

    // Uniform caching over 100 datasets.
    let mut p = SystemParams::default().with_kappa_prime(3.0).unwrap();
    p.library_size = 100;
    p.cache_size = 20.0;
    let pop = zipf(100, 0.8);
    let pol = uniform_policy(100, 20.0).unwrap();
    let est = simulate_outage(&pol, &pop, &p, &TrialConfig::new(50_000, 2), exec).unwrap();
    assert!((est.mean - (-0.6f64).exp()).abs() < 4.0 * est.stderr);

    // Optimal caching over 50 datasets, sampled and stratified.
    let mut p = SystemParams::default().with_kappa_prime(2.5).unwrap();
    p.library_size = 50;
    p.cache_size = 8.0;
    let d = derive(&p).unwrap();
    let pop = zipf(50, 0.9);
    let pol = optimal_policy(&pop, d.kappa_prime, 8.0).unwrap();
    let exact = outage(&pol, &pop, &d);
    for stratified in [false, true] {
        let mut cfg = TrialConfig::new(50_000, 3);
        cfg.stratified = stratified;
        let est = simulate_outage(&pol, &pop, &p, &cfg, exec).unwrap();
        assert!(
            (est.mean - exact).abs() < 4.0 * est.stderr,
            "{stratified}: {est:?} vs {exact}"
        );
    }
}

#[test]
fn qualifying_count_is_poisson() {
    let p = grid_params(1.0, 4.0);
    let mean = derive(&p).unwrap().kappa_prime * 0.8;
    let trials = 100_000u64;
    let bins = 7;
    let hist = coverage_histogram(0.8, &p, &TrialConfig::new(trials, 21), bins, Execution::default()).unwrap();
    let mut probs: Vec<f64> = Vec::new();
    let mut pk = (-mean).exp();
    for k in 0..bins - 1 {
        probs.push(pk);
        pk *= mean / (k + 1) as f64;
    }
    probs.push(1.0 - probs.iter().sum::<f64>());
    let stat: f64 = hist
        .iter()
        .zip(&probs)
        .map(|(o, q)| {
            let e = q * trials as f64;
            (*o as f64 - e).powi(2) / e
        })
        .sum();
    let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat < crit, "chi-square {stat} exceeds {crit}: {hist:?}");
}

#[test]
fn tail_matches_quadrature() {
    for (m, alpha) in [(0.5, 3.0), (1.0, 4.0), (3.0, 3.5)] {
        let p = grid_params(m, alpha);
        let d = derive(&p).unwrap();
        let r = truncation_radius(&p, 1.0, 1e-4).unwrap();
        let integrand = |x: f64| {
            let y = m * d.threshold / d.snr * x.powf(alpha);
            let q = if y > 0.0 {
                statrs::function::gamma::gamma_ur(m, y)
            } else {
                1.0
            };
            p.lambda * q * 2.0 * std::f64::consts::PI * x
        };
        for radius in [0.0, 0.5 * r, r] {
            let quad = simpson(integrand, radius, 40.0 * r.max(1.0), 400_000);
            let closed = truncation_tail(&p, &d, 1.0, radius);
            assert!(
                (quad - closed).abs() <= 1e-6 * closed.max(1e-4),
                "{m} {alpha} {radius}: {quad} vs {closed}"
            );
        }
        assert!(truncation_tail(&p, &d, 1.0, r) <= 1e-4);
    }
}

#[test]
fn same_seed_same_estimate() {
    let p = grid_params(3.0, 3.0);
    let cfg = TrialConfig::new(30_000, 123);
    let a = simulate_success(0.4, &p, &cfg, Execution::Parallel).unwrap();
    let b = simulate_success(0.4, &p, &cfg, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}
