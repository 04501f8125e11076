//! Noisy merge sort that logs every pairwise query.
//!
//! Each comparison repeats Bernoulli(θ_i / (θ_i + θ_j)) duels until a Hoeffding
//! interval of half-width `sqrt(ln(2/δ′) / 2m)` around the empirical win rate
//! excludes ½, with `δ′ = δ / (K log₂K)` spread over the comparisons a sort
//! needs. After `m_max = ⌈ln(2/δ′) / 2ε²⌉` duels the pair is an ε-draw and
//! the empirical majority decides.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::choice::{ChoiceRecord, PreferenceVector, Presentation};
use crate::error::{Error, Result};

/// Records of every duel, plus the ranking the sort produced (best first).
#[derive(Debug, Clone, PartialEq)]
pub struct MergeRankOutput {
    pub records: Vec<ChoiceRecord>,
    pub ranking: Vec<usize>,
}

pub fn merge_rank_generate(
    theta_star: &PreferenceVector,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<Vec<ChoiceRecord>> {
    Ok(merge_rank(theta_star, epsilon, delta, seed)?.records)
}

pub fn merge_rank(theta_star: &PreferenceVector, epsilon: f64, delta: f64, seed: u64) -> Result<MergeRankOutput> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("ε = {epsilon} must lie in (0, 0.5)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("δ = {delta} must lie in (0, 1)")));
    }
    let k = theta_star.k();
    let pairs = (k as f64 * (k as f64).log2()).max(1.0);
    let log_term = (2.0 * pairs / delta).ln();
    let m_max = (log_term / (2.0 * epsilon * epsilon)).ceil() as u64;

    let mut duel = Duel {
        theta: theta_star.as_slice(),
        k,
        log_term,
        m_max,
        rng: ChaCha8Rng::seed_from_u64(seed),
        records: Vec::new(),
    };
    let mut items: Vec<usize> = (0..k).collect();
    sort(&mut items, &mut duel)?;
    Ok(MergeRankOutput {
        records: duel.records,
        ranking: items,
    })
}

struct Duel<'a> {
    theta: &'a [f64],
    k: usize,
    log_term: f64,
    m_max: u64,
    rng: ChaCha8Rng,
    records: Vec<ChoiceRecord>,
}

impl Duel<'_> {
    /// True if `i` is judged better than `j`.
    fn better(&mut self, i: usize, j: usize) -> Result<bool> {
        let c = Presentation::new([i, j], self.k)?;
        let p = self.theta[i] / (self.theta[i] + self.theta[j]);
        let mut wins = 0u64;
        for m in 1..=self.m_max {
            let i_won = self.rng.random::<f64>() < p;
            wins += u64::from(i_won);
            self.records.push(ChoiceRecord::new(c.clone(), if i_won { i } else { j })?);
            let rate = wins as f64 / m as f64;
            let half = (self.log_term / (2.0 * m as f64)).sqrt();
            if rate - half > 0.5 {
                return Ok(true);
            }
            if rate + half < 0.5 {
                return Ok(false);
            }
        }
        Ok(2 * wins >= self.m_max)
    }
}

fn sort(items: &mut [usize], duel: &mut Duel<'_>) -> Result<()> {
    if items.len() < 2 {
        return Ok(());
    }
    let mid = items.len() / 2;
    sort(&mut items[..mid], duel)?;
    sort(&mut items[mid..], duel)?;
    let (left, right) = (items[..mid].to_vec(), items[mid..].to_vec());
    let (mut a, mut b) = (0, 0);
    for slot in items.iter_mut() {
        let take_left = b == right.len() || (a < left.len() && duel.better(left[a], right[b])?);
        if take_left {
            *slot = left[a];
            a += 1;
        } else {
            *slot = right[b];
            b += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn distinct_pairs(recs: &[ChoiceRecord]) -> usize {
        recs.iter().map(|r| r.presentation().clone()).collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn two_options_one_pair() {
        let t = PreferenceVector::new(vec![0.7, 0.3]).unwrap();
        let out = merge_rank(&t, 0.05, 0.1, 1).unwrap();
        assert_eq!(distinct_pairs(&out.records), 1);
        assert!(out.records.iter().all(|r| r.presentation().len() == 2 && r.presentation().contains(r.chosen())));
    }

    #[test]
    fn near_deterministic_comparisons_sort_exactly() {
        let w: Vec<f64> = [5, 0, 7, 2, 6, 1, 3, 4].iter().map(|&i| 1e-3f64.powi(i)).collect();
        let t = PreferenceVector::from_weights(w).unwrap();
        let out = merge_rank(&t, 0.05, 0.1, 3).unwrap();
        assert_eq!(out.ranking, t.ranking());
        let mut per_pair = std::collections::BTreeMap::new();
        for r in &out.records {
            *per_pair.entry(r.presentation().clone()).or_insert(0) += 1;
        }
        // 2·ln(2/δ′) < 20 here, so each pair stops well before the cap.
        assert!(per_pair.values().all(|&n| n <= 20), "{per_pair:?}");
    }

    #[test]
    fn bad_parameters() {
        let t = PreferenceVector::uniform(3);
        assert!(merge_rank_generate(&t, 0.0, 0.1, 0).is_err());
        assert!(merge_rank_generate(&t, 0.5, 0.1, 0).is_err());
        assert!(merge_rank_generate(&t, 0.1, 1.0, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let t = PreferenceVector::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(merge_rank(&t, 0.05, 0.1, 7).unwrap(), merge_rank(&t, 0.05, 0.1, 7).unwrap());
    }
}
