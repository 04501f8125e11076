//! Prior pseudo-counts of the generalized Dirichlet family.

use std::collections::BTreeMap;

use crate::choice::Presentation;
use crate::error::{Error, Result};

/// Relative tolerance on `Σ_C β(C) = Σ_k α_k`.
pub const PSEUDO_COUNT_REL_TOL: f64 = 1e-9;

/// Per-option pseudo-choices α and per-presentation pseudo-presentations β.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    alpha: Vec<f64>,
    beta: BTreeMap<Presentation, f64>,
}

impl Hyperparams {
    /// α with β = β₀, i.e. all presentation mass on the full set. This prior
    /// is exactly Dirichlet(α).
    pub fn dirichlet(alpha: Vec<f64>) -> Result<Self> {
        validate_alpha(&alpha)?;
        let k = alpha.len();
        let mass: f64 = alpha.iter().sum();
        let mut beta = BTreeMap::new();
        beta.insert(Presentation::full(k), mass);
        Ok(Hyperparams { alpha, beta })
    }

    /// Symmetric Dirichlet(a, …, a) prior.
    pub fn symmetric(k: usize, a: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidHyperparams("K must be positive".into()));
        }
        Self::dirichlet(vec![a; k])
    }

    pub fn new(alpha: Vec<f64>, beta: BTreeMap<Presentation, f64>) -> Result<Self> {
        validate_alpha(&alpha)?;
        let k = alpha.len();
        for (c, &b) in &beta {
            if c.min_k() > k {
                return Err(Error::InvalidHyperparams(format!(
                    "β presentation {{{c}}} out of range for K={k}"
                )));
            }
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::InvalidHyperparams(format!(
                    "β({{{c}}}) = {b} must be nonnegative"
                )));
            }
        }
        let sa: f64 = alpha.iter().sum();
        let sb: f64 = beta.values().sum();
        if (sa - sb).abs() > PSEUDO_COUNT_REL_TOL * sa.abs().max(sb.abs()) {
            return Err(Error::InvalidHyperparams(format!(
                "Σβ = {sb} must equal Σα = {sa}"
            )));
        }
        Ok(Hyperparams { alpha, beta })
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &BTreeMap<Presentation, f64> {
        &self.beta
    }

    /// True when β is β₀ for the current α.
    pub fn is_dirichlet(&self) -> bool {
        let full = Presentation::full(self.k());
        self.beta.iter().all(|(c, &b)| *c == full || b == 0.0)
    }

    /// Hyperparameters for one more option with pseudo-count `alpha_new`, β
    /// reset to β₀. Only defined for Dirichlet-form priors.
    pub fn with_new_option(&self, alpha_new: f64) -> Result<Self> {
        if !self.is_dirichlet() {
            return Err(Error::Unsupported(
                "adding options requires a Dirichlet-form (β₀) prior".into(),
            ));
        }
        let mut alpha = self.alpha.clone();
        alpha.push(alpha_new);
        Self::dirichlet(alpha)
    }
}

fn validate_alpha(alpha: &[f64]) -> Result<()> {
    if alpha.is_empty() {
        return Err(Error::InvalidHyperparams("α must be non-empty".into()));
    }
    if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::InvalidHyperparams(format!(
            "α entries must be positive, found {a}"
        )));
    }
    Ok(())
}
