//! `dluce`: run simulations and fit the Dirichlet-Luce model from the shell.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, unreadable or
//! invalid input files), 2 when the computation itself fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::RangedU64ValueParser;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use dirichlet_luce::estimate::{laplace_fit, map_estimate, MapOptions};
use dirichlet_luce::sim::{make_fixture_theta, merge_rank_generate, run_experiment, ExperimentConfig, ThetaKind, CONFIG_SCHEMA};
use dirichlet_luce::smc::{SmcConfig, SmcSampler, DEFAULT_PARTICLES};
use dirichlet_luce::{Hyperparams, SufficientStatistics};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "dluce", version, about = "Dirichlet-Luce choice model simulator", after_help = CONFIG_SCHEMA)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a config file.
    #[command(after_help = CONFIG_SCHEMA)]
    Run { config: PathBuf },
    /// MAP estimate (and optionally the Laplace normalizer) from a statistics file.
    Estimate {
        stats_file: PathBuf,
        /// Symmetric prior pseudo-count per option.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Also report the Laplace approximation of the log normalizer.
        #[arg(long)]
        laplace: bool,
    },
    /// SMC posterior mean from a statistics file.
    PosteriorMean {
        stats_file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PARTICLES, value_parser = RangedU64ValueParser::<usize>::new().range(2..))]
        particles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Merge-Rank comparisons against a dense synthetic θ*, as a statistics file on stdout.
    GenMergerank {
        #[arg(long = "K", default_value_t = 20, value_parser = RangedU64ValueParser::<usize>::new().range(2..))]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<dirichlet_luce::Error> for Failure {
    fn from(e: dirichlet_luce::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::read(existing(&config, "config")?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
            let report = run_experiment(&cfg)?;
            eprintln!(
                "wrote {} policies x {} runs to {}",
                report.runs.len(),
                cfg.runs,
                cfg.out_dir.display()
            );
            Ok(())
        }
        Command::Estimate {
            stats_file,
            alpha,
            laplace,
        } => {
            let stats = read_stats(&stats_file)?;
            let hyper = Hyperparams::symmetric(stats.k(), alpha).map_err(|e| Failure::Usage(e.to_string()))?;
            let theta = map_estimate(&stats, &hyper, &MapOptions::default())?;
            println!("{}", json!({ "estimator": "map", "alpha": alpha, "theta": theta.as_slice() }));
            let fit = laplace_fit(&stats, &hyper);
            if let Err(dirichlet_luce::Error::NotPositiveDefinite) = fit {
                eprintln!("warning: the posterior is flat along some direction; the MAP shown is one of many maximizers");
            }
            if laplace {
                let fit = fit?;
                println!(
                    "{}",
                    json!({
                        "estimator": "laplace",
                        "alpha": alpha,
                        "log_normalizer": fit.log_normalizer,
                        "log_det_neg_hessian": fit.log_det_neg_hessian,
                    })
                );
            }
            Ok(())
        }
        Command::PosteriorMean {
            stats_file,
            particles,
            seed,
        } => {
            let stats = read_stats(&stats_file)?;
            let hyper = Hyperparams::symmetric(stats.k(), 1.0)?;
            let cfg = SmcConfig {
                particles,
                seed,
                ..SmcConfig::default()
            };
            let sampler = SmcSampler::from_stats(&stats, hyper, cfg)?;
            let mean = sampler.posterior_mean()?;
            let ess = sampler.particles().effective_sample_size()?;
            println!(
                "{}",
                json!({
                    "estimator": "smc_posterior_mean",
                    "particles": particles,
                    "seed": seed,
                    "ess": ess,
                    "resamples": sampler.log().resample_count(),
                    "theta": mean,
                })
            );
            Ok(())
        }
        Command::GenMergerank { k, epsilon, delta, seed } => {
            let theta = make_fixture_theta(ThetaKind::Dense, k, seed)?;
            let records = merge_rank_generate(&theta, epsilon, delta, seed).map_err(|e| Failure::Usage(e.to_string()))?;
            let stats = SufficientStatistics::from_records(k, &records)?;
            let shown: Vec<String> = theta.as_slice().iter().map(|x| x.to_string()).collect();
            print!("# theta_star={}\n{}", shown.join(","), stats.to_text());
            Ok(())
        }
    }
}

fn existing<'a>(path: &'a Path, what: &str) -> Result<&'a Path, Failure> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Failure::Usage(format!("{what} file '{}' not found", path.display())))
    }
}

fn read_stats(path: &Path) -> Result<SufficientStatistics, Failure> {
    SufficientStatistics::read(existing(path, "statistics")?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}
