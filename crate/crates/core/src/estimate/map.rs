//! Maximum a posteriori estimation.
//!
//! The optimizer works in log-ratio coordinates `θ = softmax(η, 0)` with
//! K−1 free parameters, so every iterate is strictly inside the simplex.
//! Steps are damped Newton directions (Levenberg-shifted when the Hessian is
//! not negative definite) with a backtracking Armijo line search.

use nalgebra::{DMatrix, DVector};

use crate::choice::PreferenceVector;
use crate::density::Potential;
use crate::error::{Error, Result};
use crate::prior::Hyperparams;
use crate::stats::SufficientStatistics;

#[derive(Debug, Clone, PartialEq)]
pub struct MapOptions {
    pub max_iters: usize,
    /// Bound on the ∞-norm of the projected gradient `θ ⊙ (∇φ − ⟨θ, ∇φ⟩)`.
    pub grad_tol: f64,
    pub step_init: f64,
    pub backtrack_factor: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            max_iters: 200,
            grad_tol: 1e-8,
            step_init: 1.0,
            backtrack_factor: 0.5,
        }
    }
}

impl MapOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be ≥ 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be > 0".into()));
        }
        if !(self.step_init > 0.0) {
            return Err(Error::InvalidArgument("step_init must be > 0".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidArgument(
                "backtrack_factor must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// MAP estimate of θ under the posterior of `stats` and `hyper`.
///
/// Requires `α_k + y_k ≥ 1` for every option.
pub fn map_estimate(
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
    opts: &MapOptions,
) -> Result<PreferenceVector> {
    let p = Potential::posterior(stats, hyper)?;
    maximize(&p, opts)
}

/// Projected gradient `θ ⊙ (g − ⟨θ, g⟩)`: the gradient of `φ ∘ softmax`
/// with respect to log-preferences. Zero exactly at interior stationary points.
pub fn projected_gradient(p: &Potential, theta: &[f64]) -> Vec<f64> {
    let g = p.gradient(theta);
    let gbar: f64 = g.iter().zip(theta).map(|(g, t)| g * t).sum();
    g.iter().zip(theta).map(|(g, t)| t * (g - gbar)).collect()
}

fn softmax_with_anchor(eta: &[f64]) -> Vec<f64> {
    let m = eta.iter().copied().fold(0.0f64, f64::max);
    let mut out: Vec<f64> = eta.iter().map(|e| (e - m).exp()).collect();
    out.push((-m).exp());
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    out
}

/// Hessian of `η ↦ φ(softmax(η, 0))` over the K−1 free coordinates.
fn eta_hessian(p: &Potential, theta: &[f64], g: &[f64]) -> DMatrix<f64> {
    let d = theta.len() - 1;
    let h = p.hessian(theta);
    let gbar: f64 = g.iter().zip(theta).map(|(g, t)| g * t).sum();
    // J[i][a] = ∂θ_i/∂η_a = θ_i (δ_ia − θ_a)
    let k = theta.len();
    let jac = DMatrix::from_fn(k, d, |i, a| theta[i] * (f64::from(u8::from(i == a)) - theta[a]));
    let mut out = jac.transpose() * h * &jac;
    for a in 0..d {
        for b in 0..d {
            let mut m = -theta[a] * theta[b] * (g[a] + g[b] - 2.0 * gbar);
            if a == b {
                m += theta[a] * (g[a] - gbar);
            }
            out[(a, b)] += m;
        }
    }
    out
}

pub(crate) fn maximize(p: &Potential, opts: &MapOptions) -> Result<PreferenceVector> {
    opts.validate()?;
    let k = p.k();
    if let Some((i, e)) = p.exponents().iter().enumerate().find(|(_, e)| **e < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "α_{i} + y_{i} = {} < 1: the mode may lie on the simplex boundary",
            e + 1.0
        )));
    }
    if k == 1 {
        return Ok(PreferenceVector::uniform(1));
    }
    let mut eta = vec![0.0; k - 1];
    let mut theta = softmax_with_anchor(&eta);
    let mut value = p.eval(&theta);
    let mut last_norm = f64::INFINITY;

    for _ in 0..opts.max_iters {
        let g = p.gradient(&theta);
        let gbar: f64 = g.iter().zip(&theta).map(|(g, t)| g * t).sum();
        let pg: Vec<f64> = g.iter().zip(&theta).map(|(g, t)| t * (g - gbar)).collect();
        last_norm = max_abs(&pg);
        if last_norm <= opts.grad_tol {
            return PreferenceVector::from_weights(theta);
        }
        let grad_eta = DVector::from_column_slice(&pg[..k - 1]);
        let neg_h = -eta_hessian(p, &theta, &g);
        let dir = newton_direction(&neg_h, &grad_eta);

        let slope = grad_eta.dot(&dir);
        let mut step = opts.step_init;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = eta.iter().zip(dir.iter()).map(|(e, d)| e + step * d).collect();
            let ct = softmax_with_anchor(&cand);
            let cv = p.eval(&ct);
            // Close to the optimum φ stops resolving the ascent; fall back to
            // requiring a smaller gradient at a value equal up to rounding.
            let sufficient = cv >= value + 1e-4 * step * slope;
            let level = cv >= value - 1e-12 * value.abs().max(1.0);
            if cv.is_finite() && (sufficient || (level && max_abs(&projected_gradient(p, &ct)) < last_norm)) {
                eta = cand;
                theta = ct;
                value = cv;
                accepted = true;
                break;
            }
            step *= opts.backtrack_factor;
        }
        if !accepted {
            // No ascent possible at machine precision; accept if close enough.
            break;
        }
    }
    let norm = max_abs(&projected_gradient(p, &theta));
    if norm <= opts.grad_tol {
        return PreferenceVector::from_weights(theta);
    }
    Err(Error::DidNotConverge {
        iters: opts.max_iters,
        grad_norm: norm.min(last_norm),
        best: theta,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn newton_direction(neg_h: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let scale = neg_h.diagonal().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
    let mut shift = 0.0;
    for _ in 0..12 {
        let mut m = neg_h.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        if let Some(ch) = m.cholesky() {
            return ch.solve(grad);
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
    }
    grad.clone()
}
