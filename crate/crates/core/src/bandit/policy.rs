//! Presentation policies.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::bandit::dts::DtsState;
use crate::choice::{ChoiceRecord, Presentation};
use crate::error::{Error, Result};
use crate::prior::Hyperparams;
use crate::smc::{mix_seed, SmcConfig, SmcSampler, DEFAULT_PARTICLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    /// Thompson sampling under the Dirichlet-Luce posterior.
    DirichletLuceTs,
    /// Thompson sampling under a Dirichlet posterior on win counts only.
    DirichletMultinomialTs,
    /// Double Thompson Sampling (pairs only).
    Dts,
    UniformRandom,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::DirichletLuceTs,
        PolicyKind::DirichletMultinomialTs,
        PolicyKind::Dts,
        PolicyKind::UniformRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::DirichletLuceTs => "dirichlet_luce_ts",
            PolicyKind::DirichletMultinomialTs => "dirichlet_multinomial_ts",
            PolicyKind::Dts => "dts",
            PolicyKind::UniformRandom => "uniform_random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy '{s}'")))
    }
}

/// Settings shared by all policies; only the Thompson variants use `alpha`
/// and only `dirichlet_luce_ts` uses `particles`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOptions {
    /// Symmetric per-option prior pseudo-count.
    pub alpha: f64,
    pub particles: usize,
    pub seed: u64,
}

impl Default for PolicyOptions {
    fn default() -> Self {
        PolicyOptions {
            alpha: 1.0,
            particles: DEFAULT_PARTICLES,
            seed: 0,
        }
    }
}

/// What a policy shows in one round. `ranking` orders all options; its
/// first `L` entries are the presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Presented {
    pub presentation: Presentation,
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone)]
enum State {
    Luce(Box<SmcSampler>),
    Multinomial { alpha: Vec<f64>, y: Vec<u64> },
    Dts(DtsState),
    Uniform,
}

#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    k: usize,
    l: usize,
    state: State,
    rng: ChaCha8Rng,
}

impl Policy {
    pub fn new(kind: PolicyKind, k: usize, l: usize, opts: &PolicyOptions) -> Result<Self> {
        check_sizes(kind, k, l)?;
        let state = match kind {
            PolicyKind::DirichletLuceTs => {
                let hyper = Hyperparams::symmetric(k, opts.alpha)?;
                let config = SmcConfig {
                    particles: opts.particles,
                    seed: mix_seed(opts.seed, 1),
                    ..SmcConfig::default()
                };
                State::Luce(Box::new(SmcSampler::new(hyper, config)?))
            }
            PolicyKind::DirichletMultinomialTs => {
                Hyperparams::symmetric(k, opts.alpha)?;
                State::Multinomial {
                    alpha: vec![opts.alpha; k],
                    y: vec![0; k],
                }
            }
            PolicyKind::Dts => State::Dts(DtsState::new(k)),
            PolicyKind::UniformRandom => State::Uniform,
        };
        Ok(Policy {
            kind,
            k,
            l,
            state,
            rng: ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, 2)),
        })
    }

    /// Thompson sampling on top of an existing sampler.
    pub fn from_sampler(sampler: SmcSampler, l: usize, seed: u64) -> Result<Self> {
        let k = sampler.k();
        check_sizes(PolicyKind::DirichletLuceTs, k, l)?;
        Ok(Policy {
            kind: PolicyKind::DirichletLuceTs,
            k,
            l,
            state: State::Luce(Box::new(sampler)),
            rng: ChaCha8Rng::seed_from_u64(mix_seed(seed, 2)),
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn sampler(&self) -> Option<&SmcSampler> {
        match &self.state {
            State::Luce(s) => Some(s),
            _ => None,
        }
    }

    pub fn sampler_mut(&mut self) -> Option<&mut SmcSampler> {
        match &mut self.state {
            State::Luce(s) => Some(s),
            _ => None,
        }
    }

    /// Win counts of the Dirichlet-multinomial baseline.
    pub fn multinomial_counts(&self) -> Option<&[u64]> {
        match &self.state {
            State::Multinomial { y, .. } => Some(y),
            _ => None,
        }
    }

    pub fn dts_state(&self) -> Option<&DtsState> {
        match &self.state {
            State::Dts(s) => Some(s),
            _ => None,
        }
    }

    pub fn present(&mut self) -> Result<Presented> {
        let k = self.k;
        let ranking = match &mut self.state {
            State::Luce(s) => {
                let theta = s.sample_preference(&mut self.rng)?;
                rank_with_ties(theta.as_slice(), &mut self.rng)
            }
            State::Multinomial { alpha, y } => {
                let theta = dirichlet_draw(alpha, y, &mut self.rng)?;
                rank_with_ties(&theta, &mut self.rng)
            }
            State::Dts(d) => {
                let (a, b) = d.select(&mut self.rng);
                let mut rest: Vec<usize> = (0..k).filter(|&i| i != a && i != b).collect();
                rest.shuffle(&mut self.rng);
                [a, b].into_iter().chain(rest).collect()
            }
            State::Uniform => {
                let mut all: Vec<usize> = (0..k).collect();
                all.shuffle(&mut self.rng);
                all
            }
        };
        let presentation = Presentation::new(ranking[..self.l].iter().copied(), k)?;
        Ok(Presented { presentation, ranking })
    }

    pub fn update(&mut self, rec: &ChoiceRecord) -> Result<()> {
        let c = rec.presentation();
        if c.len() != self.l {
            return Err(Error::InvalidPresentation(format!(
                "policy presents {} options, record has {}",
                self.l,
                c.len()
            )));
        }
        if c.min_k() > self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: c.min_k(),
            });
        }
        match &mut self.state {
            State::Luce(s) => {
                s.observe(rec)?;
            }
            State::Multinomial { y, .. } => y[rec.chosen()] += 1,
            State::Dts(d) => {
                let loser = c.options().iter().copied().find(|&o| o != rec.chosen()).expect("pair");
                d.record(rec.chosen(), loser);
            }
            State::Uniform => {}
        }
        Ok(())
    }

    /// Appends an option with no history.
    pub fn add_option(&mut self, alpha_new: f64) -> Result<()> {
        match &mut self.state {
            State::Luce(s) => s.add_option(alpha_new)?,
            State::Multinomial { alpha, y } => {
                if !(alpha_new.is_finite() && alpha_new > 0.0) {
                    return Err(Error::InvalidHyperparams(format!("α = {alpha_new} must be > 0")));
                }
                alpha.push(alpha_new);
                y.push(0);
            }
            State::Dts(d) => d.add_option(),
            State::Uniform => {}
        }
        self.k += 1;
        Ok(())
    }
}

fn check_sizes(kind: PolicyKind, k: usize, l: usize) -> Result<()> {
    if k < 2 || l < 2 || l > k {
        return Err(Error::InvalidArgument(format!("need 2 ≤ L ≤ K, got L={l}, K={k}")));
    }
    if kind == PolicyKind::Dts && l != 2 {
        return Err(Error::Unsupported(format!("dts needs L = 2, got L={l}")));
    }
    Ok(())
}

/// Options by decreasing value, equal values in uniformly random order.
fn rank_with_ties(theta: &[f64], rng: &mut impl Rng) -> Vec<usize> {
    let keys: Vec<u64> = theta.iter().map(|_| rng.random()).collect();
    let mut idx: Vec<usize> = (0..theta.len()).collect();
    idx.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]).then(keys[a].cmp(&keys[b])));
    idx
}

fn dirichlet_draw(alpha: &[f64], y: &[u64], rng: &mut impl Rng) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(alpha.len());
    for (a, &n) in alpha.iter().zip(y) {
        let shape = a + n as f64;
        let d = Gamma::new(shape, 1.0).map_err(|e| Error::InvalidHyperparams(format!("Gamma({shape}): {e}")))?;
        g.push(d.sample(rng));
    }
    let s: f64 = g.iter().sum();
    if !(s > 0.0) {
        // All draws underflowed; fall back to the mean.
        let total: f64 = alpha.iter().zip(y).map(|(a, &n)| a + n as f64).sum();
        return Ok(alpha.iter().zip(y).map(|(a, &n)| (a + n as f64) / total).collect());
    }
    Ok(g.into_iter().map(|x| x / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::PreferenceVector;
    use crate::diagnostics::{chi_square_critical, chi_square_statistic};
    use crate::smc::ParticleSet;
    use std::collections::BTreeMap;

    fn opts(seed: u64) -> PolicyOptions {
        PolicyOptions {
            particles: 128,
            seed,
            ..PolicyOptions::default()
        }
    }

    #[test]
    fn names_round_trip() {
        for p in PolicyKind::ALL {
            assert_eq!(p.name().parse::<PolicyKind>().unwrap(), p);
        }
        assert!("topn".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn full_set_when_l_equals_k() {
        for kind in [PolicyKind::DirichletLuceTs, PolicyKind::DirichletMultinomialTs, PolicyKind::UniformRandom] {
            let mut p = Policy::new(kind, 3, 3, &opts(1)).unwrap();
            for _ in 0..5 {
                assert_eq!(p.present().unwrap().presentation, Presentation::full(3));
            }
        }
        let mut d = Policy::new(PolicyKind::Dts, 2, 2, &opts(1)).unwrap();
        assert_eq!(d.present().unwrap().presentation, Presentation::full(2));
    }

    #[test]
    fn size_checks() {
        assert!(matches!(
            Policy::new(PolicyKind::Dts, 5, 3, &opts(0)),
            Err(Error::Unsupported(_))
        ));
        assert!(Policy::new(PolicyKind::UniformRandom, 3, 4, &opts(0)).is_err());
        assert!(Policy::new(PolicyKind::UniformRandom, 3, 1, &opts(0)).is_err());
        let mut p = Policy::new(PolicyKind::UniformRandom, 4, 2, &opts(0)).unwrap();
        let rec = ChoiceRecord::new(Presentation::new([0, 1, 2], 4).unwrap(), 0).unwrap();
        assert!(p.update(&rec).is_err());
    }

    #[test]
    fn single_particle_presents_its_top_l() {
        let t = PreferenceVector::new(vec![0.1, 0.5, 0.4]).unwrap();
        let ps = ParticleSet::from_parts(vec![t.clone(), t], vec![1.0, 1.0], 0).unwrap();
        let sampler =
            SmcSampler::with_particles(Hyperparams::symmetric(3, 1.0).unwrap(), SmcConfig::default(), ps).unwrap();
        let mut p = Policy::from_sampler(sampler, 2, 3).unwrap();
        let out = p.present().unwrap();
        assert_eq!(out.presentation.options(), &[1, 2]);
        assert_eq!(out.ranking, vec![1, 2, 0]);
    }

    #[test]
    fn uniform_pairs_are_uniform() {
        let mut p = Policy::new(PolicyKind::UniformRandom, 5, 2, &opts(11)).unwrap();
        let mut counts: BTreeMap<Presentation, u64> = BTreeMap::new();
        let n = 10_000;
        for _ in 0..n {
            *counts.entry(p.present().unwrap().presentation).or_default() += 1;
        }
        assert_eq!(counts.len(), 10);
        let obs: Vec<u64> = counts.values().copied().collect();
        let stat = chi_square_statistic(&obs, &[n as f64 / 10.0; 10]);
        assert!(stat < chi_square_critical(9, 0.01), "χ² = {stat}");
    }

    #[test]
    fn luce_update_counts_and_keeps_ess_finite() {
        let mut p = Policy::new(PolicyKind::DirichletLuceTs, 4, 2, &opts(2)).unwrap();
        let shown = p.present().unwrap();
        let rec = ChoiceRecord::new(shown.presentation.clone(), shown.presentation.options()[0]).unwrap();
        p.update(&rec).unwrap();
        let s = p.sampler().unwrap();
        assert_eq!(s.stats().total(), 1);
        assert!(s.particles().effective_sample_size().unwrap().is_finite());
    }

    #[test]
    fn dts_update_touches_one_cell() {
        let mut p = Policy::new(PolicyKind::Dts, 4, 2, &opts(3)).unwrap();
        p.update(&ChoiceRecord::new(Presentation::new([1, 3], 4).unwrap(), 3).unwrap()).unwrap();
        let w = p.dts_state().unwrap().wins();
        assert_eq!(w[3][1], 1);
        assert_eq!(w.iter().flatten().sum::<u64>(), 1);
    }

    #[test]
    fn multinomial_ignores_presentations() {
        let mut a = Policy::new(PolicyKind::DirichletMultinomialTs, 4, 2, &opts(4)).unwrap();
        let mut b = a.clone();
        a.update(&ChoiceRecord::new(Presentation::new([0, 2], 4).unwrap(), 2).unwrap()).unwrap();
        b.update(&ChoiceRecord::new(Presentation::new([2, 3], 4).unwrap(), 2).unwrap()).unwrap();
        assert_eq!(a.multinomial_counts(), b.multinomial_counts());
    }

    #[test]
    fn same_seed_same_presentations() {
        let run = |seed| {
            let mut p = Policy::new(PolicyKind::DirichletLuceTs, 5, 2, &opts(seed)).unwrap();
            (0..20)
                .map(|_| {
                    let c = p.present().unwrap().presentation;
                    let rec = ChoiceRecord::new(c.clone(), c.options()[1]).unwrap();
                    p.update(&rec).unwrap();
                    c
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn add_option_grows_every_variant() {
        for kind in PolicyKind::ALL {
            let mut p = Policy::new(kind, 3, 2, &opts(5)).unwrap();
            p.add_option(1.0).unwrap();
            assert_eq!(p.k(), 4);
            let shown = p.present().unwrap();
            assert_eq!(shown.ranking.len(), 4);
        }
    }
}
