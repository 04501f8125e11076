//! Goodness-of-fit and accuracy measures used by the statistical checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic one-sample Kolmogorov-Smirnov critical value for sample size
/// `n` at significance `level`: `sqrt(−ln(level/2)/2) / sqrt(n)`.
pub fn ks_critical(n: f64, level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt() / n.sqrt()
}

/// Weighted one-sample KS statistic `sup |F_w(x) − F(x)|`.
pub fn ks_statistic_weighted(samples: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = s.iter().map(|x| x.1).sum();
    let mut acc = 0.0;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let x = s[i].0;
        let f = cdf(x);
        let before = acc / total;
        while i < s.len() && s[i].0 == x {
            acc += s[i].1;
            i += 1;
        }
        let after = acc / total;
        d = d.max((f - before).abs()).max((after - f).abs());
    }
    d
}

pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let w: Vec<(f64, f64)> = samples.iter().map(|&x| (x, 1.0)).collect();
    ks_statistic_weighted(&w, cdf)
}

/// Kish effective sample size `(Σw)²/Σw²`.
pub fn kish_ess(weights: impl IntoIterator<Item = f64>) -> f64 {
    let (s, s2) = weights.into_iter().fold((0.0, 0.0), |(s, s2), w| (s + w, s2 + w * w));
    s * s / s2
}

/// Weighted KS test: passes when the statistic is below the critical value
/// for the Kish effective sample size.
pub fn ks_test_weighted(samples: &[(f64, f64)], cdf: impl Fn(f64) -> f64, level: f64) -> (f64, f64, bool) {
    let d = ks_statistic_weighted(samples, cdf);
    let crit = ks_critical(kish_ess(samples.iter().map(|s| s.1)), level);
    (d, crit, d < crit)
}

/// Pearson χ² statistic for observed counts against expected counts.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

/// Upper-tail χ² critical value with `dof` degrees of freedom.
pub fn chi_square_critical(dof: usize, level: f64) -> f64 {
    ChiSquared::new(dof as f64).expect("dof > 0").inverse_cdf(1.0 - level)
}

/// `KL(p ‖ q) = Σ p log(p/q)`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).ln())
        .sum()
}

/// Kendall's τ-a between two score vectors.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let x = (a[i] - a[j]).signum() * (b[i] - b[j]).signum();
            s += x as i64;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_critical_value() {
        assert!((ks_critical(1.0, 0.01) - 1.6276).abs() < 1e-4);
    }

    #[test]
    fn ks_on_exact_grid_is_small() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&xs, |x| x) <= 0.0005 + 1e-12);
        assert!(ks_statistic(&xs, |x| x * x) > 0.2);
    }

    #[test]
    fn chi_square_critical_value() {
        // 9 dof at 1%: 21.666
        assert!((chi_square_critical(9, 0.01) - 21.666).abs() < 1e-2);
    }

    #[test]
    fn kendall_extremes() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau(&a, &a), 1.0);
        let r = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(kendall_tau(&a, &r), -1.0);
    }

    #[test]
    fn kl_zero_for_equal() {
        assert_eq!(kl_divergence(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
        assert!(kl_divergence(&[0.2, 0.8], &[0.5, 0.5]) > 0.0);
    }
}
