//! Cross-checks between the independent posterior routes.

use dirichlet_luce::diagnostics::{chi_square_critical, chi_square_statistic, ks_test_weighted};
use dirichlet_luce::estimate::{
    map_estimate, predictive_choice_prob, quadrature_posterior_mean, MapOptions, PredictiveMethod,
};
use dirichlet_luce::smc::{SmcConfig, SmcSampler};
use dirichlet_luce::{ChoiceRecord, Hyperparams, Presentation, SufficientStatistics};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rec(opts: &[usize], k: usize, chosen: usize) -> ChoiceRecord {
    ChoiceRecord::new(Presentation::new(opts.iter().copied(), k).unwrap(), chosen).unwrap()
}

fn mixed_stats() -> SufficientStatistics {
    let mut s = SufficientStatistics::new(3);
    for (opts, k, n) in [
        (&[0usize, 1][..], 0, 6),
        (&[0, 1], 1, 2),
        (&[1, 2], 2, 3),
        (&[1, 2], 1, 4),
        (&[0, 1, 2], 0, 3),
        (&[0, 1, 2], 2, 1),
    ] {
        for _ in 0..n {
            s.record_choice(&rec(opts, 3, k)).unwrap();
        }
    }
    s
}

#[test]
fn smc_mean_matches_quadrature() {
    let s = mixed_stats();
    let h = Hyperparams::symmetric(3, 1.0).unwrap();
    let exact = quadrature_posterior_mean(&s, &h, 400).unwrap();
    let cfg = SmcConfig {
        particles: 8192,
        seed: 11,
        ..SmcConfig::default()
    };
    let smc = SmcSampler::from_stats(&s, h, cfg).unwrap().posterior_mean().unwrap();
    for (a, b) in smc.iter().zip(&exact) {
        assert!((a - b).abs() < 0.01, "{smc:?} vs {exact:?}");
    }
}

#[test]
fn smc_marginal_passes_ks_against_quadrature_cdf() {
    // Marginal of θ_0 under a Dirichlet(3, 2, 2) posterior is Beta(3, 4).
    let h = Hyperparams::symmetric(3, 1.0).unwrap();
    let mut s = SufficientStatistics::new(3);
    for k in [0, 0, 1, 2] {
        s.record_choice(&rec(&[0, 1, 2], 3, k)).unwrap();
    }
    let cfg = SmcConfig {
        particles: 5000,
        seed: 5,
        ..SmcConfig::default()
    };
    let sampler = SmcSampler::from_stats(&s, h, cfg).unwrap();
    let w = sampler.particles().normalized_weights().unwrap();
    let xs: Vec<(f64, f64)> = sampler.particles().particles().zip(&w).map(|(p, &w)| (p[0], w)).collect();
    // Beta(3, 4) CDF: regularized incomplete beta, polynomial for integer shapes.
    let cdf = |x: f64| {
        let x = x.clamp(0.0, 1.0);
        (3..=6).map(|j| binom(6, j) * x.powi(j as i32) * (1.0 - x).powi(6 - j as i32)).sum::<f64>()
    };
    let (d, crit, ok) = ks_test_weighted(&xs, cdf, 0.01);
    assert!(ok, "D = {d}, critical {crit}");
}

fn binom(n: u32, k: u32) -> f64 {
    (1..=k).map(|i| (n - k + i) as f64 / i as f64).product()
}

#[test]
fn predictive_routes_agree() {
    let s = mixed_stats();
    let h = Hyperparams::symmetric(3, 2.0).unwrap();
    let c = Presentation::new([0, 2], 3).unwrap();
    let q = predictive_choice_prob(&s, &h, &c, 0, &PredictiveMethod::Quadrature { grid_n: 300 }).unwrap();
    let l = predictive_choice_prob(&s, &h, &c, 0, &PredictiveMethod::Laplace).unwrap();
    let m = predictive_choice_prob(
        &s,
        &h,
        &c,
        0,
        &PredictiveMethod::Smc {
            particles: 4096,
            seed: 3,
        },
    )
    .unwrap();
    assert!((q - l).abs() < 0.02, "{q} vs {l}");
    assert!((q - m).abs() < 0.02, "{q} vs {m}");
}

#[test]
fn map_agrees_with_quadrature_mode_direction() {
    // With many observations the mean and mode are close.
    let mut s = SufficientStatistics::new(3);
    let base = mixed_stats();
    for _ in 0..10 {
        for r in base.to_records() {
            s.record_choice(&r).unwrap();
        }
    }
    let h = Hyperparams::symmetric(3, 1.0).unwrap();
    let mode = map_estimate(&s, &h, &MapOptions::default()).unwrap();
    let mean = quadrature_posterior_mean(&s, &h, 400).unwrap();
    for (a, b) in mode.as_slice().iter().zip(&mean) {
        assert!((a - b).abs() < 0.03, "{mode:?} vs {mean:?}");
    }
    assert_eq!(mode.ranking(), vec![0, 1, 2]);
}

#[test]
fn sampled_preferences_follow_weights() {
    let s = mixed_stats();
    let h = Hyperparams::symmetric(3, 1.0).unwrap();
    let cfg = SmcConfig {
        particles: 64,
        seed: 1,
        ..SmcConfig::default()
    };
    let sampler = SmcSampler::from_stats(&s, h, cfg).unwrap();
    let ps = sampler.particles();
    let w = ps.normalized_weights().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 20_000;
    let mut counts = vec![0u64; ps.n()];
    for _ in 0..n {
        counts[ps.sample_index(&mut rng).unwrap()] += 1;
    }
    // Pool particles into 8 bins so expected counts are comfortably large.
    let bins = 8;
    let per = ps.n() / bins;
    let obs: Vec<u64> = counts.chunks(per).map(|c| c.iter().sum()).collect();
    let exp: Vec<f64> = w.chunks(per).map(|c| c.iter().sum::<f64>() * n as f64).collect();
    let stat = chi_square_statistic(&obs, &exp);
    assert!(stat < chi_square_critical(bins - 1, 0.01), "χ² = {stat}");
}
