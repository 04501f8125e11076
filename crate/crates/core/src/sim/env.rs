//! Simulated choosers.

use rand::Rng;

use crate::choice::{PreferenceVector, Presentation};
use crate::error::{Error, Result};

const MATRIX_TOL: f64 = 1e-9;

/// Pairwise preference table: `P[i][j]` is the probability that `i` beats `j`.
/// Always has a Condorcet winner.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    p: Vec<Vec<f64>>,
    winner: usize,
}

impl PreferenceMatrix {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let k = p.len();
        if k < 2 || p.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidArgument("preference matrix must be square with K ≥ 2".into()));
        }
        for i in 0..k {
            if (p[i][i] - 0.5).abs() > MATRIX_TOL {
                return Err(Error::InvalidArgument(format!("P[{i}][{i}] must be 0.5")));
            }
            for j in 0..k {
                let x = p[i][j];
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::InvalidArgument(format!("P[{i}][{j}] = {x} is not a probability")));
                }
                if (x + p[j][i] - 1.0).abs() > MATRIX_TOL {
                    return Err(Error::InvalidArgument(format!("P[{i}][{j}] + P[{j}][{i}] ≠ 1")));
                }
            }
        }
        let winner = (0..k)
            .find(|&a| (0..k).all(|j| j == a || p[a][j] > 0.5))
            .ok_or_else(|| Error::InvalidArgument("preference matrix has no Condorcet winner".into()))?;
        Ok(PreferenceMatrix { p, winner })
    }

    /// `P[i][j] = θ_i / (θ_i + θ_j)`. The winner is the unique maximizer of θ,
    /// so θ must not tie at the top.
    pub fn from_theta(theta: &PreferenceVector) -> Result<Self> {
        let t = theta.as_slice();
        let k = t.len();
        let p = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { 0.5 } else { t[i] / (t[i] + t[j]) })
                    .collect()
            })
            .collect();
        Self::new(p)
    }

    /// The four-option table with a Condorcet winner (option 0) and a
    /// rock-paper-scissors cycle among the rest.
    pub fn cyclic_example() -> Self {
        Self::new(vec![
            vec![0.5, 0.6, 0.6, 0.6],
            vec![0.4, 0.5, 0.9, 0.1],
            vec![0.4, 0.1, 0.5, 0.9],
            vec![0.4, 0.9, 0.1, 0.5],
        ])
        .expect("valid table")
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn condorcet_winner(&self) -> usize {
        self.winner
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    /// Luce chooser with a fixed preference vector.
    Transitive { theta: PreferenceVector, pairwise: PreferenceMatrix },
    /// Pairwise-only chooser driven by an explicit table.
    Cyclic { pairwise: PreferenceMatrix },
}

impl Environment {
    pub fn transitive(theta: PreferenceVector) -> Result<Self> {
        let pairwise = PreferenceMatrix::from_theta(&theta)?;
        Ok(Environment::Transitive { theta, pairwise })
    }

    pub fn cyclic(pairwise: PreferenceMatrix) -> Self {
        Environment::Cyclic { pairwise }
    }

    pub fn k(&self) -> usize {
        self.pairwise().k()
    }

    pub fn pairwise(&self) -> &PreferenceMatrix {
        match self {
            Environment::Transitive { pairwise, .. } | Environment::Cyclic { pairwise } => pairwise,
        }
    }

    pub fn theta_star(&self) -> Option<&PreferenceVector> {
        match self {
            Environment::Transitive { theta, .. } => Some(theta),
            Environment::Cyclic { .. } => None,
        }
    }

    /// Draws the option picked from `c`.
    pub fn simulate_choice(&self, c: &Presentation, rng: &mut impl Rng) -> Result<usize> {
        if c.min_k() > self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                actual: c.min_k(),
            });
        }
        let opts = c.options();
        if opts.len() == 1 {
            return Ok(opts[0]);
        }
        match self {
            Environment::Transitive { theta, .. } => {
                let t = theta.as_slice();
                let mut u = rng.random::<f64>() * c.mass(t);
                for &o in opts {
                    u -= t[o];
                    if u < 0.0 {
                        return Ok(o);
                    }
                }
                Ok(*opts.last().unwrap())
            }
            Environment::Cyclic { pairwise } => {
                if opts.len() != 2 {
                    return Err(Error::InvalidPresentation(format!(
                        "pairwise environment needs |C| = 2, got {}",
                        opts.len()
                    )));
                }
                let (i, j) = (opts[0], opts[1]);
                Ok(if rng.random::<f64>() < pairwise.get(i, j) { i } else { j })
            }
        }
    }
}
