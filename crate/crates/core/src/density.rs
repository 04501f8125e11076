//! Likelihood, prior and posterior log densities of the Dirichlet-Luce model.
//!
//! The posterior log potential is
//!
//! ```text
//! φ(θ) = Σ_k (α_k + y_k − 1) log θ_k − Σ_C (β(C) + μ(C)) log Σ_{κ∈C} θ_κ
//! ```
//!
//! and is unnormalized. It depends on the data only through (y, μ).
//! [`Potential`] is the compiled form used by optimizers and samplers: one
//! exponent per option and one weighted group per presentation with nonzero
//! total weight. Presentation membership is kept as sorted index lists plus
//! an inverted index; the option-by-presentation indicator matrix is never
//! built.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::choice::{safe_ln, PreferenceVector, Presentation};
use crate::error::{Error, Result};
use crate::prior::Hyperparams;
use crate::stats::SufficientStatistics;

/// One presentation term of φ with its exponent `β(C) + μ(C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub options: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    /// `α_k + y_k − 1`.
    exponents: Vec<f64>,
    groups: Vec<Group>,
    by_option: Vec<Vec<usize>>,
}

impl Potential {
    /// Posterior potential for `stats` under `hyper`.
    pub fn posterior(stats: &SufficientStatistics, hyper: &Hyperparams) -> Result<Self> {
        check_dims(stats, hyper)?;
        let k = hyper.k();
        let exponents = hyper
            .alpha()
            .iter()
            .zip(stats.y())
            .map(|(a, &y)| a + y as f64 - 1.0)
            .collect();
        let mut weights: BTreeMap<&Presentation, f64> = BTreeMap::new();
        for (c, &b) in hyper.beta() {
            *weights.entry(c).or_insert(0.0) += b;
        }
        for (c, m) in stats.presentations() {
            *weights.entry(c).or_insert(0.0) += m as f64;
        }
        Ok(Self::from_parts(k, exponents, weights.into_iter().map(|(c, w)| (c.options().to_vec(), w))))
    }

    /// Prior potential (empty data) for `hyper`.
    pub fn prior(hyper: &Hyperparams) -> Self {
        Self::posterior(&SufficientStatistics::new(hyper.k()), hyper).expect("dimensions agree")
    }

    /// Builds a potential from raw parts; groups with zero weight are dropped.
    pub fn from_parts(
        k: usize,
        exponents: Vec<f64>,
        groups: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Self {
        assert_eq!(exponents.len(), k);
        let groups: Vec<Group> = groups
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(options, weight)| Group { options, weight })
            .collect();
        let mut by_option = vec![Vec::new(); k];
        for (g, grp) in groups.iter().enumerate() {
            for &o in &grp.options {
                by_option[o].push(g);
            }
        }
        Potential {
            exponents,
            groups,
            by_option,
        }
    }

    pub fn k(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Indices into [`Potential::groups`] of groups containing `option`.
    pub fn groups_with(&self, option: usize) -> &[usize] {
        &self.by_option[option]
    }

    /// `Σ_{κ∈C} θ_κ` for every group.
    pub fn group_masses(&self, theta: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| g.options.iter().map(|&o| theta[o]).sum())
            .collect()
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.k());
        let mut acc = 0.0;
        for (e, &t) in self.exponents.iter().zip(theta) {
            if *e != 0.0 {
                acc += e * safe_ln(t);
            }
        }
        for g in &self.groups {
            let s: f64 = g.options.iter().map(|&o| theta[o]).sum();
            acc -= g.weight * safe_ln(s);
        }
        acc
    }

    /// ∂φ/∂θ in ambient coordinates.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self
            .exponents
            .iter()
            .zip(theta)
            .map(|(e, &t)| e / t.max(crate::choice::THETA_FLOOR))
            .collect();
        for grp in &self.groups {
            let s: f64 = grp.options.iter().map(|&o| theta[o]).sum();
            let d = grp.weight / s.max(crate::choice::THETA_FLOOR);
            for &o in &grp.options {
                g[o] -= d;
            }
        }
        g
    }

    /// ∂²φ/∂θ∂θᵀ in ambient coordinates.
    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let k = self.k();
        let mut h = DMatrix::zeros(k, k);
        for (i, (e, &t)) in self.exponents.iter().zip(theta).enumerate() {
            let t = t.max(crate::choice::THETA_FLOOR);
            h[(i, i)] = -e / (t * t);
        }
        for grp in &self.groups {
            let s: f64 = grp.options.iter().map(|&o| theta[o]).sum();
            let s = s.max(crate::choice::THETA_FLOOR);
            let d = grp.weight / (s * s);
            for &a in &grp.options {
                for &b in &grp.options {
                    h[(a, b)] += d;
                }
            }
        }
        h
    }
}

fn check_dims(stats: &SufficientStatistics, hyper: &Hyperparams) -> Result<()> {
    if stats.k() != hyper.k() {
        return Err(Error::DimensionMismatch {
            expected: hyper.k(),
            actual: stats.k(),
        });
    }
    Ok(())
}

fn check_theta(theta: &PreferenceVector, k: usize) -> Result<()> {
    if theta.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: theta.k(),
        });
    }
    Ok(())
}

/// Restricted-multinomial log likelihood `Σ_k y_k log θ_k − Σ_C μ(C) log Σ_{κ∈C} θ_κ`.
pub fn log_likelihood(stats: &SufficientStatistics, theta: &PreferenceVector) -> Result<f64> {
    check_theta(theta, stats.k())?;
    let t = theta.as_slice();
    let mut acc = 0.0;
    for (&y, &tk) in stats.y().iter().zip(t) {
        if y > 0 {
            acc += y as f64 * safe_ln(tk);
        }
    }
    for (c, m) in stats.presentations() {
        acc -= m as f64 * safe_ln(c.mass(t));
    }
    Ok(acc)
}

/// Unnormalized posterior log density φ(θ).
pub fn log_posterior_potential(
    theta: &PreferenceVector,
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
) -> Result<f64> {
    check_theta(theta, hyper.k())?;
    Ok(Potential::posterior(stats, hyper)?.eval(theta.as_slice()))
}

pub fn grad_log_posterior(
    theta: &PreferenceVector,
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
) -> Result<Vec<f64>> {
    check_theta(theta, hyper.k())?;
    Ok(Potential::posterior(stats, hyper)?.gradient(theta.as_slice()))
}

pub fn hessian_log_posterior(
    theta: &PreferenceVector,
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
) -> Result<DMatrix<f64>> {
    check_theta(theta, hyper.k())?;
    Ok(Potential::posterior(stats, hyper)?.hessian(theta.as_slice()))
}

/// Log kernel of Dirichlet(a): `Σ_k (a_k − 1) log θ_k`.
pub fn dirichlet_log_kernel(theta: &[f64], a: &[f64]) -> f64 {
    a.iter()
        .zip(theta)
        .map(|(a, &t)| if *a == 1.0 { 0.0 } else { (a - 1.0) * safe_ln(t) })
        .sum()
}
