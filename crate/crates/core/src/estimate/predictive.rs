//! Posterior predictive choice probabilities `E[θ_k / Σ_{κ∈C} θ_κ]`.

use crate::choice::Presentation;
use crate::density::Potential;
use crate::error::{Error, Result};
use crate::estimate::laplace::fit_potential;
use crate::estimate::quadrature::{check_quadrature, expectations, ThetaFn};
use crate::prior::Hyperparams;
use crate::smc::{SmcConfig, SmcSampler};
use crate::stats::SufficientStatistics;

#[derive(Debug, Clone, PartialEq)]
pub enum PredictiveMethod {
    /// Ratio of two Laplace-approximated normalizers: the numerator adds one
    /// pseudo-choice of `k` and one pseudo-presentation of `C`.
    Laplace,
    /// Weighted particle average after replaying the statistics.
    Smc { particles: usize, seed: u64 },
    /// Centroid quadrature (K ≤ 4).
    Quadrature { grid_n: usize },
}

pub fn predictive_choice_prob(
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
    c: &Presentation,
    k: usize,
    method: &PredictiveMethod,
) -> Result<f64> {
    Ok(predictive_choice_probs(stats, hyper, c, method)?
        .into_iter()
        .find(|(o, _)| *o == k)
        .ok_or_else(|| Error::NotInPresentation {
            option: k,
            presentation: c.to_string(),
        })?
        .1)
}

/// Predictive probabilities for every member of `c`, in option order.
pub fn predictive_choice_probs(
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
    c: &Presentation,
    method: &PredictiveMethod,
) -> Result<Vec<(usize, f64)>> {
    if c.min_k() > hyper.k() {
        return Err(Error::DimensionMismatch {
            expected: hyper.k(),
            actual: c.min_k(),
        });
    }
    let ratio = |k: usize| move |t: &[f64]| t[k] / c.mass(t);
    let probs = match method {
        PredictiveMethod::Quadrature { grid_n } => {
            check_quadrature(hyper.k(), *grid_n)?;
            let p = Potential::posterior(stats, hyper)?;
            let fs: Vec<_> = c.options().iter().map(|&k| ratio(k)).collect();
            let refs: Vec<ThetaFn> = fs.iter().map(|f| f as ThetaFn).collect();
            expectations(&p, *grid_n, &refs)
        }
        PredictiveMethod::Smc { particles, seed } => {
            let cfg = SmcConfig {
                particles: *particles,
                seed: *seed,
                ..SmcConfig::default()
            };
            let sampler = SmcSampler::from_stats(stats, hyper.clone(), cfg)?;
            c.options()
                .iter()
                .map(|&k| sampler.particles().expectation(ratio(k)))
                .collect::<Result<Vec<_>>>()?
        }
        PredictiveMethod::Laplace => {
            let base = Potential::posterior(stats, hyper)?;
            let log_z = fit_potential(&base)?.log_normalizer;
            c.options()
                .iter()
                .map(|&k| {
                    let tilted = tilt(&base, k, c);
                    Ok((fit_potential(&tilted)?.log_normalizer - log_z).exp())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(c.options().iter().copied().zip(probs).collect())
}

/// `φ + log θ_k − log Σ_{κ∈C} θ_κ` as a potential.
fn tilt(base: &Potential, k: usize, c: &Presentation) -> Potential {
    let mut exps = base.exponents().to_vec();
    exps[k] += 1.0;
    let mut groups: Vec<(Vec<usize>, f64)> = base.groups().iter().map(|g| (g.options.clone(), g.weight)).collect();
    match groups.iter_mut().find(|(o, _)| o.as_slice() == c.options()) {
        Some(g) => g.1 += 1.0,
        None => groups.push((c.options().to_vec(), 1.0)),
    }
    Potential::from_parts(base.k(), exps, groups)
}
