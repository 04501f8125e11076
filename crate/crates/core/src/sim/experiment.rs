//! Simulation loop: present, observe a simulated choice, update, score.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bandit::{count_unique_presentations, regret_top_n, weak_dueling_regret, Policy, PolicyKind, PolicyOptions, RegretTrace};
use crate::choice::ChoiceRecord;
use crate::error::{Error, Result};
use crate::sim::config::{EnvKind, ExperimentConfig, RegretKind};
use crate::sim::env::{Environment, PreferenceMatrix};
use crate::sim::fixture::make_fixture_theta;
use crate::smc::{mix_seed, SmcLog};
use crate::stats::SufficientStatistics;

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub policy: PolicyKind,
    pub run: usize,
    pub trace: RegretTrace,
    /// `(t, distinct presentations after t rounds)` at each checkpoint.
    pub unique_presentations: Vec<(usize, usize)>,
    /// Only for `dirichlet_luce_ts`.
    pub smc_log: Option<SmcLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: PolicyKind,
    pub checkpoint: usize,
    pub mean_cum_regret: f64,
    /// Population standard deviation over runs.
    pub std_cum_regret: f64,
    pub mean_unique_presentations: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub environment: Environment,
    pub runs: Vec<(PolicyKind, Vec<RunResult>)>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn runs_for(&self, policy: PolicyKind) -> Option<&[RunResult]> {
        self.runs.iter().find(|(p, _)| *p == policy).map(|(_, r)| r.as_slice())
    }

    pub fn summary_row(&self, policy: PolicyKind, checkpoint: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.policy == policy && r.checkpoint == checkpoint)
    }

    /// CSV with header
    /// `policy,checkpoint,mean_cum_regret,std_cum_regret,mean_unique_presentations`.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("policy,checkpoint,mean_cum_regret,std_cum_regret,mean_unique_presentations\n");
        for r in &self.summary {
            writeln!(
                s,
                "{},{},{},{},{}",
                r.policy, r.checkpoint, r.mean_cum_regret, r.std_cum_regret, r.mean_unique_presentations
            )
            .unwrap();
        }
        s
    }
}

/// Rounds at which the summary is taken: T/10, T/2 and T, without repeats.
pub fn checkpoints(t: usize) -> Vec<usize> {
    let mut c = vec![t / 10, t / 2, t];
    c.dedup();
    c
}

pub fn build_environment(cfg: &ExperimentConfig) -> Result<Environment> {
    match cfg.env {
        EnvKind::Transitive => Environment::transitive(make_fixture_theta(cfg.theta_kind, cfg.k, cfg.seed)?),
        EnvKind::Cyclic => Ok(Environment::cyclic(PreferenceMatrix::cyclic_example())),
    }
}

/// One run of `policy` with seed `cfg.seed ^ run`.
pub fn simulate_run(cfg: &ExperimentConfig, env: &Environment, policy: PolicyKind, run: usize) -> Result<RunResult> {
    let seed = cfg.seed ^ run as u64;
    let opts = PolicyOptions {
        particles: cfg.particles,
        seed,
        ..PolicyOptions::default()
    };
    let mut pol = Policy::new(policy, cfg.k, cfg.l, &opts)?;
    let mut env_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 3));
    let mut stats = SufficientStatistics::new(cfg.k);
    let mut trace = RegretTrace::new();
    let marks = checkpoints(cfg.t);
    let mut unique = Vec::with_capacity(marks.len());
    if marks.first() == Some(&0) {
        unique.push((0, 0));
    }
    for t in 1..=cfg.t {
        let shown = pol.present()?;
        let regret = match cfg.regret {
            RegretKind::Weak => weak_dueling_regret(&shown.presentation, env.pairwise())?,
            RegretKind::Top(n) => {
                let theta = env
                    .theta_star()
                    .ok_or_else(|| Error::Config("top-n regret needs a transitive environment".into()))?;
                regret_top_n(&shown.ranking, theta, n)?
            }
        };
        let chosen = env.simulate_choice(&shown.presentation, &mut env_rng)?;
        let rec = ChoiceRecord::new(shown.presentation, chosen)?;
        pol.update(&rec)?;
        stats.record_choice(&rec)?;
        trace.push(regret);
        if marks.contains(&t) {
            unique.push((t, count_unique_presentations(&stats)));
        }
    }
    Ok(RunResult {
        policy,
        run,
        trace,
        unique_presentations: unique,
        smc_log: pol.sampler().map(|s| s.log().clone()),
    })
}

/// Runs every policy `cfg.runs` times (runs in parallel) without writing files.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let env = build_environment(cfg)?;
    let mut runs = Vec::with_capacity(cfg.policies.len());
    for &policy in &cfg.policies {
        let results = (0..cfg.runs)
            .into_par_iter()
            .map(|r| simulate_run(cfg, &env, policy, r))
            .collect::<Result<Vec<_>>>()?;
        runs.push((policy, results));
    }
    let summary = summarize(&runs, &checkpoints(cfg.t));
    Ok(ExperimentReport {
        environment: env,
        runs,
        summary,
    })
}

fn summarize(runs: &[(PolicyKind, Vec<RunResult>)], marks: &[usize]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (policy, results) in runs {
        let n = results.len() as f64;
        for (i, &t) in marks.iter().enumerate() {
            let vals: Vec<f64> = results.iter().map(|r| r.trace.cumulative_at(t)).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let uniq = results.iter().map(|r| r.unique_presentations[i].1 as f64).sum::<f64>() / n;
            rows.push(SummaryRow {
                policy: *policy,
                checkpoint: t,
                mean_cum_regret: mean,
                std_cum_regret: var.sqrt(),
                mean_unique_presentations: uniq,
            });
        }
    }
    rows
}

/// Simulates and writes `<out_dir>/<policy>/run_<r>.csv`,
/// `<out_dir>/<policy>/ess_<r>.csv` (SMC policies) and `<out_dir>/summary.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = simulate(cfg)?;
    write_report(&report, &cfg.out_dir)?;
    Ok(report)
}

pub fn write_report(report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    for (policy, results) in &report.runs {
        let dir = out_dir.join(policy.name());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for r in results {
            write_file(&dir.join(format!("run_{}.csv", r.run)), &r.trace.to_csv())?;
            if let Some(log) = &r.smc_log {
                write_file(&dir.join(format!("ess_{}.csv", r.run)), &log.to_csv())?;
            }
        }
    }
    write_file(&out_dir.join("summary.csv"), &report.summary_csv())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
