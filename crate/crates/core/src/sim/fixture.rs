//! Synthetic ground-truth preference vectors.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::choice::PreferenceVector;
use crate::error::{Error, Result};

/// Mass carried by the head of a sparse vector.
pub const SPARSE_HEAD_MASS: f64 = 0.8;
/// Concentration of the dense Dirichlet draw.
pub const DENSE_CONCENTRATION: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    /// A few options hold most of the mass.
    Sparse,
    /// Sorted Dirichlet(5, …, 5) draw.
    Dense,
}

impl fmt::Display for ThetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThetaKind::Sparse => "sparse",
            ThetaKind::Dense => "dense",
        })
    }
}

impl FromStr for ThetaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(ThetaKind::Sparse),
            "dense" => Ok(ThetaKind::Dense),
            _ => Err(Error::Config(format!("unknown theta_kind '{s}'"))),
        }
    }
}

/// θ* sorted in decreasing order.
///
/// Sparse: the top `⌈k/10⌉` options decay geometrically (ratio ½) and share
/// 80% of the mass; the rest is split in proportion to seeded U(0, 1] draws.
/// Dense: a Dirichlet(5·1) draw.
pub fn make_fixture_theta(kind: ThetaKind, k: usize, seed: u64) -> Result<PreferenceVector> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fixture needs k ≥ 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = match kind {
        ThetaKind::Sparse => {
            let head = k.div_ceil(10);
            let geo: Vec<f64> = (0..head).map(|i| 0.5f64.powi(i as i32)).collect();
            let gs: f64 = geo.iter().sum();
            let tail: Vec<f64> = (head..k).map(|_| 1.0 - rng.random::<f64>()).collect();
            let ts: f64 = tail.iter().sum();
            let tail_mass = 1.0 - SPARSE_HEAD_MASS;
            geo.iter()
                .map(|g| SPARSE_HEAD_MASS * g / gs)
                .chain(tail.iter().map(|t| tail_mass * t / ts))
                .collect::<Vec<_>>()
        }
        ThetaKind::Dense => {
            let gamma = Gamma::new(DENSE_CONCENTRATION, 1.0).expect("valid shape");
            let g: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
            let s: f64 = g.iter().sum();
            g.into_iter().map(|x| x / s).collect()
        }
    };
    theta.sort_by(|a, b| b.total_cmp(a));
    PreferenceVector::from_weights(theta)
}
