//! Sequential Monte Carlo over the preference simplex.
//!
//! Particles start from a flat Dirichlet(1) (or the Dirichlet prior when β is
//! β₀) and are reweighted by the restricted choice probability of every new
//! observation, which costs O(L) per particle. When the effective sample
//! size falls below a fraction of N the set is resampled multinomially and
//! each particle takes a Metropolis-within-Gibbs sweep targeting the current
//! posterior.
//!
//! The Gibbs sweep picks one coordinate `m` to act as the implicit
//! `θ_m = 1 − Σ_{i≠m} θ_i` (chosen at random each sweep) and, for every other
//! coordinate `j`, proposes `θ̂_j ~ U(0, θ_j + θ_m)`. The proposal interval is
//! unchanged by the move, so the acceptance probability is the plain density
//! ratio `min{1, exp(φ(θ̂) − φ(θ))}`. Only presentations containing exactly
//! one of `j` and `m` change their mass, which keeps the ratio cheap.
//!
//! Weights are stored as logarithms. Every particle move uses its own
//! ChaCha stream derived from the master seed, the move epoch and the
//! particle index, so results do not depend on thread scheduling.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;

use crate::choice::{safe_ln, ChoiceRecord, PreferenceVector, THETA_FLOOR};
use crate::density::Potential;
use crate::error::{Error, Result};
use crate::prior::Hyperparams;
use crate::stats::SufficientStatistics;

pub const DEFAULT_PARTICLES: usize = 2048;
pub const DEFAULT_ESS_THRESHOLD: f64 = 0.5;

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Weighted particle approximation of a distribution on the simplex.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    k: usize,
    /// Row-major N×K.
    particles: Vec<f64>,
    log_weights: Vec<f64>,
    seed: u64,
    epoch: u64,
    rng: ChaCha8Rng,
}

/// Counts from one move pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

fn flat_dirichlet(rng: &mut impl Rng, out: &mut [f64]) {
    let mut s = 0.0;
    for x in out.iter_mut() {
        let e: f64 = Exp1.sample(rng);
        *x = e;
        s += e;
    }
    out.iter_mut().for_each(|x| *x = (*x / s).max(THETA_FLOOR));
}

fn dirichlet(rng: &mut impl Rng, alpha: &[f64], out: &mut [f64]) {
    let mut s = 0.0;
    for (x, &a) in out.iter_mut().zip(alpha) {
        let g: f64 = Gamma::new(a, 1.0).expect("α > 0").sample(rng);
        *x = g;
        s += g;
    }
    if s > 0.0 {
        out.iter_mut().for_each(|x| *x = (*x / s).max(THETA_FLOOR));
    } else {
        flat_dirichlet(rng, out);
    }
}

impl ParticleSet {
    /// `n` particles drawn i.i.d. from the flat Dirichlet(1), unit weights.
    pub fn init(n: usize, k: usize, seed: u64) -> Result<Self> {
        Self::init_with(n, k, seed, flat_dirichlet)
    }

    /// `n` particles drawn i.i.d. from Dirichlet(α), unit weights.
    pub fn init_dirichlet(n: usize, alpha: &[f64], seed: u64) -> Result<Self> {
        Self::init_with(n, alpha.len(), seed, |rng, row| dirichlet(rng, alpha, row))
    }

    fn init_with(
        n: usize,
        k: usize,
        seed: u64,
        mut draw: impl FnMut(&mut ChaCha8Rng, &mut [f64]),
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 particles, got {n}")));
        }
        if k < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 options, got {k}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut particles = vec![0.0; n * k];
        for row in particles.chunks_mut(k) {
            draw(&mut rng, row);
        }
        Ok(ParticleSet {
            k,
            particles,
            log_weights: vec![0.0; n],
            seed,
            epoch: 0,
            rng,
        })
    }

    /// Builds a set from explicit particles and weights (weights may be
    /// unnormalized; at least one must be positive).
    pub fn from_parts(particles: Vec<PreferenceVector>, weights: Vec<f64>, seed: u64) -> Result<Self> {
        if particles.len() < 2 || particles.len() != weights.len() {
            return Err(Error::InvalidArgument(
                "need ≥ 2 particles and one weight per particle".into(),
            ));
        }
        let k = particles[0].k();
        if particles.iter().any(|p| p.k() != k) {
            return Err(Error::InvalidArgument("particles differ in dimension".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and ≥ 0".into()));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::DegenerateWeights);
        }
        Ok(ParticleSet {
            k,
            particles: particles.iter().flat_map(|p| p.as_slice().iter().copied()).collect(),
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            seed,
            epoch: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn n(&self) -> usize {
        self.log_weights.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.particles[i * self.k..(i + 1) * self.k]
    }

    pub fn particles(&self) -> impl Iterator<Item = &[f64]> {
        self.particles.chunks(self.k)
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Overwrites log weights (used by importance-weighted initialization).
    pub fn set_log_weights(&mut self, lw: Vec<f64>) -> Result<()> {
        if lw.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: lw.len(),
            });
        }
        self.log_weights = lw;
        Ok(())
    }

    /// Weights rescaled so the largest equals 1.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let m = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::DegenerateWeights);
        }
        Ok(self.log_weights.iter().map(|w| (w - m).exp()).collect())
    }

    /// Normalized weights summing to 1.
    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let w = self.weights()?;
        let s: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / s).collect())
    }

    /// Multiplies every weight by the particle's probability of the observed choice.
    pub fn reweight(&mut self, rec: &ChoiceRecord) -> Result<()> {
        let c = rec.presentation();
        if c.min_k() > self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: c.min_k(),
            });
        }
        if c.len() == 1 {
            return Ok(());
        }
        let k = self.k;
        let chosen = rec.chosen();
        for (row, lw) in self.particles.chunks(k).zip(self.log_weights.iter_mut()) {
            *lw += safe_ln(row[chosen]) - safe_ln(c.mass(row));
        }
        Ok(())
    }

    /// `(Σw)² / Σw²`.
    pub fn effective_sample_size(&self) -> Result<f64> {
        let w = self.weights()?;
        let s: f64 = w.iter().sum();
        let s2: f64 = w.iter().map(|x| x * x).sum();
        Ok(s * s / s2)
    }

    fn cumulative(&self) -> Result<Vec<f64>> {
        let w = self.weights()?;
        let mut acc = 0.0;
        Ok(w.into_iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect())
    }

    fn pick(cum: &[f64], rng: &mut impl Rng) -> usize {
        let total = *cum.last().unwrap();
        let u = rng.random::<f64>() * total;
        cum.partition_point(|&c| c <= u).min(cum.len() - 1)
    }

    /// Draws N particles i.i.d. from the weighted empirical law; weights reset to 1.
    pub fn resample_multinomial(&mut self) -> Result<()> {
        let cum = self.cumulative()?;
        let n = self.n();
        let k = self.k;
        let mut next = Vec::with_capacity(self.particles.len());
        for _ in 0..n {
            let i = Self::pick(&cum, &mut self.rng);
            next.extend_from_slice(&self.particles[i * k..(i + 1) * k]);
        }
        self.particles = next;
        self.log_weights.iter_mut().for_each(|w| *w = 0.0);
        Ok(())
    }

    /// Index of one particle drawn with probability proportional to weight.
    pub fn sample_index(&self, rng: &mut impl Rng) -> Result<usize> {
        let cum = self.cumulative()?;
        Ok(Self::pick(&cum, rng))
    }

    /// One particle drawn with probability proportional to weight.
    pub fn sample_preference(&self, rng: &mut impl Rng) -> Result<PreferenceVector> {
        let i = self.sample_index(rng)?;
        PreferenceVector::from_weights(self.particle(i).to_vec())
    }

    /// Weighted mean of `f` over particles.
    pub fn expectation(&self, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
        let w = self.normalized_weights()?;
        Ok(self.particles().zip(w).map(|(p, w)| w * f(p)).sum())
    }

    /// Weighted mean of θ.
    pub fn mean(&self) -> Result<Vec<f64>> {
        let w = self.normalized_weights()?;
        let mut m = vec![0.0; self.k];
        for (p, w) in self.particles().zip(w) {
            for (mi, pi) in m.iter_mut().zip(p) {
                *mi += w * pi;
            }
        }
        Ok(m)
    }

    /// `sweeps` Metropolis-within-Gibbs sweeps per particle targeting `exp φ`.
    /// Weights are untouched.
    pub fn move_metropolis_within_gibbs(&mut self, target: &Potential, sweeps: usize) -> Result<MoveStats> {
        if sweeps < 1 {
            return Err(Error::InvalidArgument("sweeps must be ≥ 1".into()));
        }
        if target.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: target.k(),
            });
        }
        self.epoch += 1;
        let stream = mix_seed(self.seed, self.epoch);
        let k = self.k;
        let (proposed, accepted) = self
            .particles
            .par_chunks_mut(k)
            .enumerate()
            .map(|(i, row)| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(stream, i as u64));
                gibbs_particle(target, row, sweeps, &mut rng)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok(MoveStats { proposed, accepted })
    }

    /// Adds one option with no history. Each particle gets
    /// `θ_new ~ Beta(alpha_new, alpha_rest)` and the old coordinates are
    /// rescaled by `1 − θ_new`; weights are kept. Under a β₀ prior this maps
    /// a K-option posterior sample onto the (K+1)-option posterior.
    pub fn add_option(&mut self, alpha_new: f64, alpha_rest: f64) -> Result<()> {
        let beta = rand_distr::Beta::new(alpha_new, alpha_rest)
            .map_err(|e| Error::InvalidArgument(format!("Beta({alpha_new}, {alpha_rest}): {e}")))?;
        let k = self.k;
        let mut next = Vec::with_capacity(self.n() * (k + 1));
        for row in self.particles.chunks(k) {
            let t: f64 = beta.sample(&mut self.rng);
            let t = t.clamp(THETA_FLOOR, 1.0 - THETA_FLOOR);
            next.extend(row.iter().map(|x| x * (1.0 - t)));
            next.push(t);
        }
        self.particles = next;
        self.k = k + 1;
        Ok(())
    }
}

fn gibbs_particle(target: &Potential, theta: &mut [f64], sweeps: usize, rng: &mut ChaCha8Rng) -> (u64, u64) {
    let k = theta.len();
    let exps = target.exponents();
    let groups = target.groups();
    let mut masses = target.group_masses(theta);
    let (mut proposed, mut accepted) = (0u64, 0u64);
    for _ in 0..sweeps {
        let m = rng.random_range(0..k);
        for j in (0..k).filter(|&j| j != m) {
            let r = theta[j] + theta[m];
            if r <= 2.0 * THETA_FLOOR {
                continue;
            }
            let cand = (rng.random::<f64>() * r).clamp(THETA_FLOOR, r - THETA_FLOOR);
            let cand_m = r - cand;
            let dj = cand - theta[j];
            let dm = cand_m - theta[m];
            let mut delta = exps[j] * (cand.ln() - safe_ln(theta[j])) + exps[m] * (cand_m.ln() - safe_ln(theta[m]));
            for &g in target.groups_with(j) {
                if groups[g].options.binary_search(&m).is_err() {
                    delta -= groups[g].weight * (dj / masses[g]).ln_1p();
                }
            }
            for &g in target.groups_with(m) {
                if groups[g].options.binary_search(&j).is_err() {
                    delta -= groups[g].weight * (dm / masses[g]).ln_1p();
                }
            }
            proposed += 1;
            let u: f64 = rng.random();
            if delta >= 0.0 || u.ln() < delta {
                accepted += 1;
                theta[j] = cand;
                theta[m] = cand_m;
                for &g in target.groups_with(j) {
                    if groups[g].options.binary_search(&m).is_err() {
                        masses[g] += dj;
                    }
                }
                for &g in target.groups_with(m) {
                    if groups[g].options.binary_search(&j).is_err() {
                        masses[g] += dm;
                    }
                }
            }
        }
    }
    (proposed, accepted)
}

/// What one SMC step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// ESS after reweighting (before any resampling).
    pub ess: f64,
    pub resampled: bool,
    pub moves: MoveStats,
}

/// Reweights by `rec`; if ESS < `ess_threshold_frac · N`, resamples and applies
/// one move sweep targeting the posterior of `stats` (which must already
/// include `rec`).
pub fn smc_step(
    ps: &mut ParticleSet,
    rec: &ChoiceRecord,
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
    ess_threshold_frac: f64,
) -> Result<StepOutcome> {
    smc_step_with(ps, rec, ess_threshold_frac, 1, || Potential::posterior(stats, hyper))
}

fn smc_step_with(
    ps: &mut ParticleSet,
    rec: &ChoiceRecord,
    ess_threshold_frac: f64,
    sweeps: usize,
    target: impl FnOnce() -> Result<Potential>,
) -> Result<StepOutcome> {
    if !(ess_threshold_frac > 0.0 && ess_threshold_frac < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ESS threshold fraction must lie in (0, 1), got {ess_threshold_frac}"
        )));
    }
    ps.reweight(rec)?;
    let ess = ps.effective_sample_size()?;
    if ess < ess_threshold_frac * ps.n() as f64 {
        ps.resample_multinomial()?;
        let moves = ps.move_metropolis_within_gibbs(&target()?, sweeps)?;
        Ok(StepOutcome {
            ess,
            resampled: true,
            moves,
        })
    } else {
        Ok(StepOutcome {
            ess,
            resampled: false,
            moves: MoveStats::default(),
        })
    }
}

/// One row of the SMC diagnostics trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcLogEntry {
    pub t: u64,
    pub ess: f64,
    pub resampled: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SmcLog {
    pub entries: Vec<SmcLogEntry>,
}

impl SmcLog {
    pub fn resample_count(&self) -> usize {
        self.entries.iter().filter(|e| e.resampled).count()
    }

    /// CSV with header `t,ess,resampled`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,ess,resampled\n");
        for e in &self.entries {
            writeln!(s, "{},{},{}", e.t, e.ess, u8::from(e.resampled)).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmcConfig {
    pub particles: usize,
    pub ess_threshold_frac: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for SmcConfig {
    fn default() -> Self {
        SmcConfig {
            particles: DEFAULT_PARTICLES,
            ess_threshold_frac: DEFAULT_ESS_THRESHOLD,
            sweeps: 1,
            seed: 0,
        }
    }
}

/// Particle approximation of the posterior that tracks its own statistics.
#[derive(Debug, Clone)]
pub struct SmcSampler {
    particles: ParticleSet,
    stats: SufficientStatistics,
    hyper: Hyperparams,
    config: SmcConfig,
    log: SmcLog,
}

impl SmcSampler {
    pub fn new(hyper: Hyperparams, config: SmcConfig) -> Result<Self> {
        let k = hyper.k();
        let alpha_flat = hyper.alpha().iter().all(|&a| a == 1.0);
        let particles = if hyper.is_dirichlet() {
            if alpha_flat {
                ParticleSet::init(config.particles, k, config.seed)?
            } else {
                ParticleSet::init_dirichlet(config.particles, hyper.alpha(), config.seed)?
            }
        } else {
            // Flat proposal, importance-weighted by the prior kernel.
            let mut ps = ParticleSet::init(config.particles, k, config.seed)?;
            let prior = Potential::prior(&hyper);
            let lw = ps.particles().map(|p| prior.eval(p)).collect();
            ps.set_log_weights(lw)?;
            ps
        };
        Ok(SmcSampler {
            particles,
            stats: SufficientStatistics::new(k),
            hyper,
            config,
            log: SmcLog::default(),
        })
    }

    /// Sampler with no observations whose particles are given explicitly
    /// (they should already represent the prior).
    pub fn with_particles(hyper: Hyperparams, config: SmcConfig, particles: ParticleSet) -> Result<Self> {
        if particles.k() != hyper.k() {
            return Err(Error::DimensionMismatch {
                expected: hyper.k(),
                actual: particles.k(),
            });
        }
        Ok(SmcSampler {
            particles,
            stats: SufficientStatistics::new(hyper.k()),
            hyper,
            config,
            log: SmcLog::default(),
        })
    }

    /// Sampler conditioned on `stats`, replaying its records in a seeded
    /// random order.
    pub fn from_stats(stats: &SufficientStatistics, hyper: Hyperparams, config: SmcConfig) -> Result<Self> {
        use rand::seq::SliceRandom;
        let mut records = stats.to_records();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, 0x5EED));
        records.shuffle(&mut rng);
        let mut s = Self::new(hyper, config)?;
        for r in &records {
            s.observe(r)?;
        }
        Ok(s)
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.particles
    }

    pub fn particles_mut(&mut self) -> &mut ParticleSet {
        &mut self.particles
    }

    pub fn stats(&self) -> &SufficientStatistics {
        &self.stats
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn log(&self) -> &SmcLog {
        &self.log
    }

    pub fn k(&self) -> usize {
        self.hyper.k()
    }

    /// Adds `rec` to the statistics, then runs one SMC step.
    pub fn observe(&mut self, rec: &ChoiceRecord) -> Result<StepOutcome> {
        self.stats.record_choice(rec)?;
        let (stats, hyper) = (&self.stats, &self.hyper);
        let out = smc_step_with(
            &mut self.particles,
            rec,
            self.config.ess_threshold_frac,
            self.config.sweeps,
            || Potential::posterior(stats, hyper),
        )?;
        self.log.entries.push(SmcLogEntry {
            t: self.stats.total(),
            ess: out.ess,
            resampled: out.resampled,
        });
        Ok(out)
    }

    pub fn sample_preference(&self, rng: &mut impl Rng) -> Result<PreferenceVector> {
        self.particles.sample_preference(rng)
    }

    pub fn posterior_mean(&self) -> Result<Vec<f64>> {
        self.particles.mean()
    }

    /// Forces a resample followed by `sweeps` move sweeps.
    pub fn rejuvenate(&mut self, sweeps: usize) -> Result<MoveStats> {
        self.particles.resample_multinomial()?;
        let target = Potential::posterior(&self.stats, &self.hyper)?;
        self.particles.move_metropolis_within_gibbs(&target, sweeps)
    }

    /// Appends a never-presented option with prior pseudo-count `alpha_new`.
    /// Requires a β₀ prior.
    pub fn add_option(&mut self, alpha_new: f64) -> Result<()> {
        let hyper = self.hyper.with_new_option(alpha_new)?;
        let rest: f64 = self.hyper.alpha().iter().sum();
        self.particles.add_option(alpha_new, rest)?;
        self.stats.extend_options(self.stats.k() + 1)?;
        self.hyper = hyper;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::Presentation;

    fn pref(v: &[f64]) -> PreferenceVector {
        PreferenceVector::from_weights(v.to_vec()).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_on_simplex() {
        let a = ParticleSet::init(50, 4, 9).unwrap();
        let b = ParticleSet::init(50, 4, 9).unwrap();
        assert_eq!(a.particles, b.particles);
        for p in a.particles() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x > 0.0));
        }
        assert!(ParticleSet::init(2, 2, 0).is_ok());
        assert!(ParticleSet::init(1, 3, 0).is_err());
        assert!(ParticleSet::init(3, 1, 0).is_err());
    }

    #[test]
    fn flat_init_moments() {
        let n = 10_000;
        let ps = ParticleSet::init(n, 3, 1).unwrap();
        let m = ps.mean().unwrap();
        // Var of Beta(1, 2) is 1/18.
        let tol = 3.0 * (1.0f64 / 18.0).sqrt() / (n as f64).sqrt();
        for x in m {
            assert!((x - 1.0 / 3.0).abs() < tol, "{x}");
        }
    }

    #[test]
    fn reweight_examples() {
        let mut ps = ParticleSet::from_parts(vec![pref(&[0.5, 0.3, 0.2]), pref(&[0.2, 0.2, 0.6])], vec![1.0, 1.0], 0)
            .unwrap();
        let rec = ChoiceRecord::new(Presentation::new([0, 1], 3).unwrap(), 0).unwrap();
        ps.reweight(&rec).unwrap();
        assert!((ps.log_weights()[0].exp() - 0.625).abs() < 1e-12);
        assert!((ps.log_weights()[1].exp() - 0.5).abs() < 1e-12);

        let before = ps.log_weights().to_vec();
        let forced = ChoiceRecord::new(Presentation::new([2], 3).unwrap(), 2).unwrap();
        ps.reweight(&forced).unwrap();
        assert_eq!(ps.log_weights(), &before[..]);
    }

    #[test]
    fn ess_examples() {
        let ps = ParticleSet::init(100, 3, 0).unwrap();
        assert!((ps.effective_sample_size().unwrap() - 100.0).abs() < 1e-9);

        let parts = vec![pref(&[0.5, 0.5]), pref(&[0.4, 0.6]), pref(&[0.3, 0.7])];
        let ps = ParticleSet::from_parts(parts.clone(), vec![2.0, 1.0, 1.0], 0).unwrap();
        assert!((ps.effective_sample_size().unwrap() - 16.0 / 6.0).abs() < 1e-12);

        let ps = ParticleSet::from_parts(parts.clone(), vec![1.0, 0.0, 0.0], 0).unwrap();
        assert!((ps.effective_sample_size().unwrap() - 1.0).abs() < 1e-12);

        assert!(matches!(
            ParticleSet::from_parts(parts, vec![0.0; 3], 0),
            Err(Error::DegenerateWeights)
        ));
        let mut ps = ParticleSet::init(4, 2, 0).unwrap();
        ps.set_log_weights(vec![f64::NEG_INFINITY; 4]).unwrap();
        assert!(matches!(ps.effective_sample_size(), Err(Error::DegenerateWeights)));
    }

    #[test]
    fn resample_single_weight_copies() {
        let parts = vec![pref(&[0.5, 0.5]), pref(&[0.1, 0.9]), pref(&[0.3, 0.7])];
        let mut ps = ParticleSet::from_parts(parts, vec![0.0, 1.0, 0.0], 3).unwrap();
        ps.resample_multinomial().unwrap();
        for p in ps.particles() {
            assert_eq!(p, &[0.1, 0.9]);
        }
        assert!(ps.log_weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn sample_single_nonzero_weight() {
        let parts = vec![pref(&[0.5, 0.5]), pref(&[0.1, 0.9])];
        let ps = ParticleSet::from_parts(parts, vec![0.0, 3.0], 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(ps.sample_preference(&mut rng).unwrap().as_slice(), &[0.1, 0.9]);
        }
    }

    #[test]
    fn flat_target_always_accepts() {
        let mut ps = ParticleSet::init(200, 4, 5).unwrap();
        let flat = Potential::prior(&Hyperparams::symmetric(4, 1.0).unwrap());
        let stats = ps.move_metropolis_within_gibbs(&flat, 3).unwrap();
        assert_eq!(stats.proposed, 200 * 3 * 3);
        assert_eq!(stats.accepted, stats.proposed);
        for p in ps.particles() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn moves_are_reproducible() {
        let h = Hyperparams::symmetric(3, 1.0).unwrap();
        let mut s = SufficientStatistics::new(3);
        s.record_choice(&ChoiceRecord::new(Presentation::new([0, 2], 3).unwrap(), 2).unwrap()).unwrap();
        let target = Potential::posterior(&s, &h).unwrap();
        let mut a = ParticleSet::init(64, 3, 11).unwrap();
        let mut b = a.clone();
        a.move_metropolis_within_gibbs(&target, 2).unwrap();
        b.move_metropolis_within_gibbs(&target, 2).unwrap();
        assert_eq!(a.particles, b.particles);
    }

    #[test]
    fn step_without_information_never_resamples() {
        let h = Hyperparams::symmetric(3, 1.0).unwrap();
        let mut ps = ParticleSet::init(100, 3, 2).unwrap();
        let mut stats = SufficientStatistics::new(3);
        let rec = ChoiceRecord::new(Presentation::new([1], 3).unwrap(), 1).unwrap();
        stats.record_choice(&rec).unwrap();
        let out = smc_step(&mut ps, &rec, &stats, &h, 0.5).unwrap();
        assert!(!out.resampled);
        assert!((out.ess - 100.0).abs() < 1e-9);
        assert!(smc_step(&mut ps, &rec, &stats, &h, 1.0).is_err());
    }

    #[test]
    fn step_resamples_when_degenerate() {
        let h = Hyperparams::symmetric(2, 1.0).unwrap();
        let parts = vec![pref(&[0.99, 0.01]), pref(&[0.01, 0.99]), pref(&[0.02, 0.98]), pref(&[0.03, 0.97])];
        let mut ps = ParticleSet::from_parts(parts, vec![1.0; 4], 4).unwrap();
        let rec = ChoiceRecord::new(Presentation::new([0, 1], 2).unwrap(), 0).unwrap();
        let mut stats = SufficientStatistics::new(2);
        stats.record_choice(&rec).unwrap();
        let out = smc_step(&mut ps, &rec, &stats, &h, 0.5).unwrap();
        assert!(out.resampled);
        assert_eq!(out.moves.proposed, 4);
        assert!(ps.log_weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn add_option_extends_particles() {
        let mut s = SmcSampler::new(Hyperparams::symmetric(3, 1.0).unwrap(), SmcConfig { particles: 100, ..Default::default() })
            .unwrap();
        s.add_option(1.0).unwrap();
        assert_eq!(s.k(), 4);
        assert_eq!(s.particles().k(), 4);
        assert_eq!(s.stats().k(), 4);
        for p in s.particles().particles() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_csv() {
        let mut s = SmcSampler::new(Hyperparams::symmetric(2, 1.0).unwrap(), SmcConfig { particles: 8, ..Default::default() })
            .unwrap();
        s.observe(&ChoiceRecord::new(Presentation::new([0, 1], 2).unwrap(), 0).unwrap()).unwrap();
        let csv = s.log().to_csv();
        assert!(csv.starts_with("t,ess,resampled\n1,"));
    }
}
