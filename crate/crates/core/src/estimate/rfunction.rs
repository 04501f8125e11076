//! Arguments of Carlson's R function, the nontrivial part of the posterior
//! normalizer:
//!
//! ```text
//! R(a, Z, b) = B(a)⁻¹ ∫_Δ Π_k θ_k^{a_k − 1} Π_C (z_Cᵀ θ)^{−b_C} dθ
//! ```
//!
//! with `a = α + y`, one 0/1 column `z_C` per presentation and `b = β + μ`.
//! Only two structural rules are implemented: columns with zero exponent can
//! be dropped, and when `Σa = Σb` the roles of rows and columns can be
//! swapped, `R(a, Z, b) = R(b, Zᵀ, a)`. No series evaluation is attempted;
//! values come from quadrature (small dimension) or Laplace.

use statrs::function::gamma::ln_gamma;

use crate::density::Potential;
use crate::error::{Error, Result};
use crate::estimate::laplace::fit_potential;
use crate::estimate::quadrature::{check_quadrature, log_integral};
use crate::prior::Hyperparams;
use crate::stats::SufficientStatistics;

/// Relative tolerance on `Σa = Σb`.
const SUM_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RFunctionQuery {
    a: Vec<f64>,
    /// Support of each column of Z and its exponent b.
    columns: Vec<(Vec<usize>, f64)>,
}

impl RFunctionQuery {
    pub fn new(a: Vec<f64>, columns: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if a.is_empty() || a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidArgument("a must be non-empty and positive".into()));
        }
        for (support, b) in &columns {
            if support.is_empty() || support.iter().any(|&i| i >= a.len()) {
                return Err(Error::InvalidArgument("column support out of range".into()));
            }
            if !(b.is_finite() && *b >= 0.0) {
                return Err(Error::InvalidArgument(format!("column exponent {b} must be ≥ 0")));
            }
        }
        let sa: f64 = a.iter().sum();
        let sb: f64 = columns.iter().map(|(_, b)| b).sum();
        if (sa - sb).abs() > SUM_REL_TOL * sa.max(sb) {
            return Err(Error::InvalidArgument(format!("Σa = {sa} differs from Σb = {sb}")));
        }
        Ok(RFunctionQuery { a, columns })
    }

    /// `a = α + y`, columns from β + μ.
    pub fn from_model(stats: &SufficientStatistics, hyper: &Hyperparams) -> Result<Self> {
        let p = Potential::posterior(stats, hyper)?;
        let a = p.exponents().iter().map(|e| e + 1.0).collect();
        let columns = p.groups().iter().map(|g| (g.options.clone(), g.weight)).collect();
        Self::new(a, columns)
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn columns(&self) -> &[(Vec<usize>, f64)] {
        &self.columns
    }

    /// Removes columns whose exponent is zero; R is unchanged.
    pub fn drop_zero_columns(mut self) -> Self {
        self.columns.retain(|(_, b)| *b != 0.0);
        self
    }

    /// The transposed query `(b, Zᵀ, a)`.
    pub fn transpose(&self) -> Self {
        let a = self.columns.iter().map(|(_, b)| *b).collect::<Vec<_>>();
        let columns = self
            .a
            .iter()
            .enumerate()
            .map(|(row, &ak)| {
                let support = self
                    .columns
                    .iter()
                    .enumerate()
                    .filter(|(_, (s, _))| s.contains(&row))
                    .map(|(j, _)| j)
                    .collect();
                (support, ak)
            })
            .collect();
        RFunctionQuery { a, columns }
    }

    fn potential(&self) -> Potential {
        Potential::from_parts(
            self.a.len(),
            self.a.iter().map(|x| x - 1.0).collect(),
            self.columns.iter().cloned(),
        )
    }

    /// `log B(a)`.
    pub fn log_beta(&self) -> f64 {
        self.a.iter().map(|&x| ln_gamma(x)).sum::<f64>() - ln_gamma(self.a.iter().sum())
    }

    /// `log R` by centroid quadrature; needs at most four rows.
    pub fn log_value_quadrature(&self, grid_n: usize) -> Result<f64> {
        check_quadrature(self.a.len(), grid_n)?;
        Ok(log_integral(&self.potential(), grid_n) - self.log_beta())
    }

    /// `log R` by Laplace approximation of the integral.
    pub fn log_value_laplace(&self) -> Result<f64> {
        Ok(fit_potential(&self.potential())?.log_normalizer - self.log_beta())
    }
}
