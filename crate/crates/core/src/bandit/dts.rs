//! Double Thompson Sampling for dueling bandits.
//!
//! Beta(1, 1) priors on every pairwise win probability. The first arm is
//! drawn among the options with the highest upper-confidence Copeland score;
//! the second is the strongest sampled challenger of the first among those
//! whose lower confidence bound against it does not exceed ½.

use rand::Rng;
use rand_distr::{Beta, Distribution};

/// Exploration constant of the confidence bounds.
pub const DTS_CONFIDENCE: f64 = 0.51;

#[derive(Debug, Clone, PartialEq)]
pub struct DtsState {
    /// wins[i][j]: times i beat j.
    wins: Vec<Vec<u64>>,
    round: u64,
}

impl DtsState {
    pub fn new(k: usize) -> Self {
        DtsState {
            wins: vec![vec![0; k]; k],
            round: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.wins.len()
    }

    pub fn wins(&self) -> &[Vec<u64>] {
        &self.wins
    }

    pub fn record(&mut self, winner: usize, loser: usize) {
        self.wins[winner][loser] += 1;
    }

    pub fn add_option(&mut self) {
        let k = self.k() + 1;
        for row in &mut self.wins {
            row.push(0);
        }
        self.wins.push(vec![0; k]);
    }

    fn bounds(&self, i: usize, j: usize) -> (f64, f64) {
        if i == j {
            return (0.5, 0.5);
        }
        let w = self.wins[i][j] as f64;
        let n = w + self.wins[j][i] as f64;
        if n == 0.0 {
            return (0.0, 1.0);
        }
        let t = (self.round.max(1)) as f64;
        let r = (DTS_CONFIDENCE * t.ln() / n).sqrt();
        (w / n - r, w / n + r)
    }

    fn sample_beat(&self, i: usize, j: usize, rng: &mut impl Rng) -> f64 {
        let a = self.wins[i][j] as f64 + 1.0;
        let b = self.wins[j][i] as f64 + 1.0;
        Beta::new(a, b).expect("positive parameters").sample(rng)
    }

    /// Chooses the next duel `(first, second)` with `first ≠ second`.
    pub fn select(&mut self, rng: &mut impl Rng) -> (usize, usize) {
        self.round += 1;
        let k = self.k();

        let copeland: Vec<usize> = (0..k)
            .map(|i| (0..k).filter(|&j| j != i && self.bounds(i, j).1 > 0.5).count())
            .collect();
        let top = *copeland.iter().max().unwrap();
        let candidates: Vec<usize> = (0..k).filter(|&i| copeland[i] == top).collect();

        let mut sample = vec![vec![0.5; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let x = self.sample_beat(i, j, rng);
                sample[i][j] = x;
                sample[j][i] = 1.0 - x;
            }
        }
        let score = |i: usize| (0..k).filter(|&j| j != i && sample[i][j] > 0.5).count();
        let best = candidates.iter().map(|&i| score(i)).max().unwrap();
        let first = pick(candidates.into_iter().filter(|&i| score(i) == best).collect(), rng);

        let mut challengers: Vec<usize> = (0..k).filter(|&i| i != first && self.bounds(i, first).0 <= 0.5).collect();
        if challengers.is_empty() {
            challengers = (0..k).filter(|&i| i != first).collect();
        }
        let draws: Vec<(usize, f64)> = challengers.iter().map(|&i| (i, self.sample_beat(i, first, rng))).collect();
        let top = draws.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
        let second = pick(draws.iter().filter(|d| d.1 == top).map(|d| d.0).collect(), rng);
        (first, second)
    }
}

fn pick(items: Vec<usize>, rng: &mut impl Rng) -> usize {
    items[rng.random_range(0..items.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn never_duels_itself() {
        let mut s = DtsState::new(5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let (a, b) = s.select(&mut rng);
            assert_ne!(a, b);
            s.record(a.min(b), a.max(b));
        }
    }

    #[test]
    fn record_touches_one_entry() {
        let mut s = DtsState::new(3);
        s.record(2, 0);
        let total: u64 = s.wins().iter().flatten().sum();
        assert_eq!(total, 1);
        assert_eq!(s.wins()[2][0], 1);
    }

    #[test]
    fn settles_on_the_winner_when_comparisons_are_deterministic() {
        // Lower index always wins.
        let mut s = DtsState::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut last_miss = 0;
        for t in 1..=3000 {
            let (a, b) = s.select(&mut rng);
            if a != 0 && b != 0 {
                last_miss = t;
            }
            s.record(a.min(b), a.max(b));
        }
        assert!(last_miss < 2000, "winner still missed at round {last_miss}");
    }

    #[test]
    fn extends_with_empty_history() {
        let mut s = DtsState::new(2);
        s.record(0, 1);
        s.add_option();
        assert_eq!(s.k(), 3);
        assert_eq!(s.wins()[2], vec![0, 0, 0]);
        assert_eq!(s.wins()[0], vec![0, 1, 0]);
    }
}
