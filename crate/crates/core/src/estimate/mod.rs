//! Point estimates, normalizer approximations and predictive probabilities.

pub mod laplace;
pub mod map;
pub mod predictive;
pub mod quadrature;
pub mod rfunction;

pub use laplace::{laplace_fit, laplace_log_normalizer, LaplaceFit};
pub use map::{map_estimate, projected_gradient, MapOptions};
pub use predictive::{predictive_choice_prob, predictive_choice_probs, PredictiveMethod};
pub use quadrature::{exact_log_normalizer_small, marginal_density, quadrature_posterior_mean, SimplexGrid};
pub use rfunction::RFunctionQuery;
