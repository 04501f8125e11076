//! Laplace approximation of the posterior normalizer.
//!
//! Tangent parameterization: the last coordinate is implicit,
//! `θ_K = 1 − Σ_{i<K} θ_i`, and the reduced Hessian is
//! `H̃_ab = H_ab − H_aK − H_Kb + H_KK` over the first K−1 coordinates. This is
//! the same coordinate patch used by the quadrature oracle, so both report
//! the normalizer under the same measure.

use nalgebra::DMatrix;

use crate::choice::PreferenceVector;
use crate::density::Potential;
use crate::error::{Error, Result};
use crate::estimate::map::{maximize, MapOptions};
use crate::prior::Hyperparams;
use crate::stats::SufficientStatistics;

/// Mode and log normalizer of a Laplace fit.
#[derive(Debug, Clone)]
pub struct LaplaceFit {
    pub mode: PreferenceVector,
    pub log_potential_at_mode: f64,
    pub log_det_neg_hessian: f64,
    pub log_normalizer: f64,
}

/// `φ(θ̂) + ((K−1)/2) log 2π − ½ log det(−H̃)`.
pub fn laplace_log_normalizer(stats: &SufficientStatistics, hyper: &Hyperparams) -> Result<f64> {
    Ok(laplace_fit(stats, hyper)?.log_normalizer)
}

pub fn laplace_fit(stats: &SufficientStatistics, hyper: &Hyperparams) -> Result<LaplaceFit> {
    fit_potential(&Potential::posterior(stats, hyper)?)
}

/// Reduced (K−1)×(K−1) Hessian in the drop-last-coordinate patch.
pub fn reduced_hessian(h: &DMatrix<f64>) -> DMatrix<f64> {
    let k = h.nrows();
    let last = k - 1;
    DMatrix::from_fn(last, last, |a, b| h[(a, b)] - h[(a, last)] - h[(last, b)] + h[(last, last)])
}

pub(crate) fn fit_potential(p: &Potential) -> Result<LaplaceFit> {
    let mode = maximize(p, &MapOptions::default())?;
    let theta = mode.as_slice();
    let phi = p.eval(theta);
    let neg = -reduced_hessian(&p.hessian(theta));
    let d = neg.nrows();
    let max_diag = (0..d).map(|i| neg[(i, i)].abs()).fold(0.0f64, f64::max);
    let chol = neg.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    // A numerically singular direction shows up as a vanishing pivot.
    let min_pivot = chol.l().diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x * x));
    if !(min_pivot > 1e-9 * max_diag.max(1.0)) || !log_det.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    let log_normalizer = phi + 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det;
    Ok(LaplaceFit {
        mode,
        log_potential_at_mode: phi,
        log_det_neg_hessian: log_det,
        log_normalizer,
    })
}
