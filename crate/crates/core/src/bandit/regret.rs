//! Regret measures and traces.

use std::fmt::Write;

use crate::choice::{PreferenceVector, Presentation};
use crate::error::{Error, Result};
use crate::sim::PreferenceMatrix;
use crate::stats::SufficientStatistics;

/// Top-n regret: best achievable `Σθ*` over n options minus the `θ*` mass of
/// the first `n` entries of `ranking`.
pub fn regret_top_n(ranking: &[usize], theta_star: &PreferenceVector, n: usize) -> Result<f64> {
    let k = theta_star.k();
    if n == 0 || n > ranking.len() {
        return Err(Error::InvalidArgument(format!(
            "n = {n} out of range for a ranking of length {}",
            ranking.len()
        )));
    }
    let mut chosen = vec![false; k];
    for &o in ranking {
        if o >= k {
            return Err(Error::InvalidArgument(format!("option {o} out of range for K={k}")));
        }
    }
    for &o in &ranking[..n] {
        if chosen[o] {
            return Err(Error::InvalidArgument(format!("option {o} ranked twice")));
        }
        chosen[o] = true;
    }
    let t = theta_star.as_slice();
    // Among equal values prefer the presented ones, so a maximizing subset
    // scores exactly zero.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| t[b].total_cmp(&t[a]).then(chosen[b].cmp(&chosen[a])).then(a.cmp(&b)));
    let mut best = vec![false; k];
    for &o in &order[..n] {
        best[o] = true;
    }
    let missed: f64 = (0..k).filter(|&o| best[o] && !chosen[o]).map(|o| t[o]).sum();
    let extra: f64 = (0..k).filter(|&o| chosen[o] && !best[o]).map(|o| t[o]).sum();
    Ok((missed - extra).max(0.0))
}

/// Gap between the Condorcet winner and the better member of `pair`:
/// `min_{a∈pair} P[a*][a] − ½`.
pub fn weak_dueling_regret(pair: &Presentation, pref: &PreferenceMatrix) -> Result<f64> {
    if pair.len() != 2 {
        return Err(Error::InvalidPresentation(format!("expected a pair, got {} options", pair.len())));
    }
    if pair.min_k() > pref.k() {
        return Err(Error::DimensionMismatch {
            expected: pref.k(),
            actual: pair.min_k(),
        });
    }
    let w = pref.condorcet_winner();
    Ok(pair.options().iter().map(|&a| pref.get(w, a) - 0.5).fold(f64::INFINITY, f64::min))
}

/// Number of distinct presentations seen so far.
pub fn count_unique_presentations(stats: &SufficientStatistics) -> usize {
    stats.unique_presentations()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretTrace {
    instantaneous: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: f64) {
        let prev = self.cumulative.last().copied().unwrap_or(0.0);
        self.instantaneous.push(r);
        self.cumulative.push(prev + r);
    }

    pub fn len(&self) -> usize {
        self.instantaneous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instantaneous.is_empty()
    }

    pub fn instantaneous(&self) -> &[f64] {
        &self.instantaneous
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Cumulative regret after `t` rounds (`t = 0` gives 0).
    pub fn cumulative_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.cumulative[t - 1]
        }
    }

    pub fn total(&self) -> f64 {
        self.cumulative_at(self.len())
    }

    /// CSV with header `t,instantaneous,cumulative`, rounds numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,instantaneous,cumulative\n");
        for (i, (r, c)) in self.instantaneous.iter().zip(&self.cumulative).enumerate() {
            writeln!(s, "{},{},{}", i + 1, r, c).unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::ChoiceRecord;
    use proptest::prelude::*;

    fn theta(v: &[f64]) -> PreferenceVector {
        PreferenceVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn top_n_examples() {
        let t = theta(&[0.5, 0.3, 0.2]);
        assert_eq!(regret_top_n(&[0, 1, 2], &t, 2).unwrap(), 0.0);
        assert!((regret_top_n(&[2, 1, 0], &t, 2).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(regret_top_n(&[2, 0, 1], &t, 3).unwrap(), 0.0);
        assert!(regret_top_n(&[0, 1], &t, 3).is_err());
        assert!(regret_top_n(&[0, 1], &t, 0).is_err());
        assert!(regret_top_n(&[0, 0], &t, 2).is_err());
    }

    #[test]
    fn ties_count_as_optimal() {
        let t = theta(&[0.4, 0.3, 0.3]);
        assert_eq!(regret_top_n(&[0, 2], &t, 2).unwrap(), 0.0);
        assert_eq!(regret_top_n(&[0, 1], &t, 2).unwrap(), 0.0);
    }

    #[test]
    fn weak_regret_examples() {
        let m = PreferenceMatrix::cyclic_example();
        let pair = Presentation::new([1, 2], 4).unwrap();
        assert!((weak_dueling_regret(&pair, &m).unwrap() - 0.1).abs() < 1e-12);
        let with_winner = Presentation::new([0, 3], 4).unwrap();
        assert_eq!(weak_dueling_regret(&with_winner, &m).unwrap(), 0.0);
        assert!(weak_dueling_regret(&Presentation::full(3), &m).is_err());
    }

    #[test]
    fn unique_presentation_counts() {
        let mut s = SufficientStatistics::new(4);
        assert_eq!(count_unique_presentations(&s), 0);
        let c = Presentation::new([0, 1], 4).unwrap();
        for _ in 0..15 {
            s.record_choice(&ChoiceRecord::new(c.clone(), 0).unwrap()).unwrap();
        }
        assert_eq!(count_unique_presentations(&s), 1);
        for opts in [[0, 2], [1, 3], [2, 3]] {
            s.record_choice(&ChoiceRecord::new(Presentation::new(opts, 4).unwrap(), opts[0]).unwrap()).unwrap();
        }
        assert_eq!(count_unique_presentations(&s), 4);
    }

    #[test]
    fn trace_csv() {
        let mut tr = RegretTrace::new();
        assert_eq!(tr.total(), 0.0);
        tr.push(0.5);
        tr.push(0.25);
        assert_eq!(tr.cumulative(), &[0.5, 0.75]);
        assert_eq!(tr.to_csv(), "t,instantaneous,cumulative\n1,0.5,0.5\n2,0.25,0.75\n");
    }

    proptest! {
        #[test]
        fn top_n_is_relabeling_invariant(
            w in prop::collection::vec(0.01f64..1.0, 5),
            perm_seed in any::<u64>(),
            n in 1usize..=5,
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let t = PreferenceVector::from_weights(w.clone()).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
            let mut ranking: Vec<usize> = (0..5).collect();
            ranking.shuffle(&mut rng);
            let mut relabel: Vec<usize> = (0..5).collect();
            relabel.shuffle(&mut rng);
            let mut w2 = vec![0.0; 5];
            for (i, &r) in relabel.iter().enumerate() {
                w2[r] = w[i];
            }
            let t2 = PreferenceVector::from_weights(w2).unwrap();
            let ranking2: Vec<usize> = ranking.iter().map(|&o| relabel[o]).collect();
            let a = regret_top_n(&ranking, &t, n).unwrap();
            let b = regret_top_n(&ranking2, &t2, n).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
