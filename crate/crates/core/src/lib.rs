//! Dirichlet-Luce Bayesian choice model.
//!
//! Users pick one option from a presented subset; the probability of picking
//! `k` from `C` is `θ_k / Σ_{κ∈C} θ_κ`. A generalized Dirichlet prior with
//! per-option (α) and per-presentation (β) pseudo-counts is conjugate to this
//! likelihood. This crate provides:
//!
//! - [`choice`], [`stats`], [`prior`], [`density`]: domain types, sufficient
//!   statistics and exact log densities with gradients and Hessians;
//! - [`estimate`]: MAP, Laplace normalizers and a small-K quadrature oracle;
//! - [`smc`]: a resample-move particle sampler of the posterior;
//! - [`bandit`]: Thompson-sampling presentation and baseline policies;
//! - [`sim`]: simulated choosers, Merge-Rank data and the experiment runner.

pub mod bandit;
pub mod choice;
pub mod density;
pub mod diagnostics;
pub mod error;
pub mod estimate;
pub mod prior;
pub mod sim;
pub mod smc;
pub mod stats;

pub use choice::{log_choice_prob, ChoiceRecord, PreferenceVector, Presentation};
pub use density::{grad_log_posterior, hessian_log_posterior, log_likelihood, log_posterior_potential, Potential};
pub use error::{Error, Result};
pub use prior::Hyperparams;
pub use smc::{ParticleSet, SmcConfig, SmcSampler};
pub use stats::SufficientStatistics;
