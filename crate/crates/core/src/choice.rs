//! Options, presentations and the Luce choice rule.
//!
//! A [`Presentation`] is the subset of options shown at one round; a
//! [`ChoiceRecord`] pairs it with the option the user picked. Latent
//! preferences live on the probability simplex as a [`PreferenceVector`],
//! and the probability of picking `k` from `C` is `θ_k / Σ_{κ∈C} θ_κ`.

use std::fmt;

use crate::error::{Error, Result};

/// Smallest value an entry of θ is allowed to take before a logarithm.
pub const THETA_FLOOR: f64 = 1e-12;

#[inline]
pub(crate) fn safe_ln(x: f64) -> f64 {
    x.max(THETA_FLOOR).ln()
}

/// A non-empty set of distinct options, stored sorted ascending.
///
/// Two presentations built from the same options in any order are equal and
/// hash identically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Presentation(Vec<usize>);

impl Presentation {
    /// Builds a presentation over `k` options, validating membership bounds
    /// and rejecting duplicates.
    pub fn new(options: impl IntoIterator<Item = usize>, k: usize) -> Result<Self> {
        let mut opts: Vec<usize> = options.into_iter().collect();
        if opts.is_empty() {
            return Err(Error::InvalidPresentation("empty presentation".into()));
        }
        opts.sort_unstable();
        if let Some(w) = opts.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPresentation(format!(
                "duplicate option {}",
                w[0]
            )));
        }
        if let Some(&bad) = opts.last().filter(|&&o| o >= k) {
            return Err(Error::InvalidPresentation(format!(
                "option {bad} out of range for K={k}"
            )));
        }
        Ok(Presentation(opts))
    }

    /// The full set `[K]`.
    pub fn full(k: usize) -> Self {
        assert!(k > 0, "K must be positive");
        Presentation((0..k).collect())
    }

    pub fn options(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, option: usize) -> bool {
        self.0.binary_search(&option).is_ok()
    }

    /// Largest option index plus one; the smallest K this presentation fits.
    pub fn min_k(&self) -> usize {
        self.0.last().map_or(0, |o| o + 1)
    }

    /// `Σ_{κ∈C} θ_κ`.
    pub fn mass(&self, theta: &[f64]) -> f64 {
        self.0.iter().map(|&o| theta[o]).sum()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for o in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{o}")?;
            first = false;
        }
        Ok(())
    }
}

/// One round of interaction: option `chosen` picked from `presentation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChoiceRecord {
    presentation: Presentation,
    chosen: usize,
}

impl ChoiceRecord {
    pub fn new(presentation: Presentation, chosen: usize) -> Result<Self> {
        if !presentation.contains(chosen) {
            return Err(Error::NotInPresentation {
                option: chosen,
                presentation: presentation.to_string(),
            });
        }
        Ok(ChoiceRecord {
            presentation,
            chosen,
        })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn chosen(&self) -> usize {
        self.chosen
    }
}

/// A point θ in the interior of the (K−1)-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceVector(Vec<f64>);

impl PreferenceVector {
    /// Tolerance on `|Σθ − 1|`.
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPreference("empty vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidPreference(format!(
                "entries must be finite and strictly positive, found {p}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidPreference(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        Ok(PreferenceVector(probs))
    }

    /// Normalizes positive weights onto the simplex.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidPreference(format!(
                "weights must have a positive finite sum, got {sum}"
            )));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "K must be positive");
        PreferenceVector(vec![1.0 / k as f64; k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Options ordered by decreasing preference; ties keep index order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        idx.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]).then(a.cmp(&b)));
        idx
    }
}

impl std::ops::Index<usize> for PreferenceVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `log p(k | C) = log θ_k − log Σ_{κ∈C} θ_κ`.
pub fn log_choice_prob(theta: &PreferenceVector, c: &Presentation, k: usize) -> Result<f64> {
    if c.min_k() > theta.k() {
        return Err(Error::DimensionMismatch {
            expected: theta.k(),
            actual: c.min_k(),
        });
    }
    if !c.contains(k) {
        return Err(Error::NotInPresentation {
            option: k,
            presentation: c.to_string(),
        });
    }
    let t = theta.as_slice();
    Ok(safe_ln(t[k]) - safe_ln(c.mass(t)))
}
