//! Monte Carlo experiments: draw a model per trial from the prior, run one
//! policy on it, and aggregate stopping times and error rates.

mod config;
mod output;

pub use config::{format_prior, parse_prior, read_prior_file, ExperimentConfig};
pub use output::{emit, read_report, write_csv, write_json, ExperimentReport, OutputFormat};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run_elimination, run_top_two, ElimState, PolicyKind, Sampling, TrialStreams, Ttts, Ttucb};
use crate::bandit::{BanditModel, TrialResult};
use crate::error::{Error, Result};
use crate::prior::{delta0, sample_model};
use crate::rng::{mix64, trial_seed, Purpose, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_trials: u64,
    pub avg_tau: f64,
    pub max_tau: u64,
    /// Wrong recommendations among trials that stopped on their own.
    pub error_rate: f64,
    pub n_errors: u64,
    pub n_truncated: u64,
    pub wall_time_s: f64,
    pub per_trial: Vec<TrialResult>,
}

/// Seed of the model draw for a trial. Paired experiments share it across
/// policies so each policy faces the same sequence of instances.
pub fn model_seed(cfg: &ExperimentConfig, trial_index: u64) -> u64 {
    let seed = trial_seed(cfg.master_seed, trial_index);
    if cfg.paired {
        seed
    } else {
        mix64(seed ^ mix64(cfg.policy as u64 + 1))
    }
}

/// The instance faced in a given trial.
pub fn trial_model(cfg: &ExperimentConfig, trial_index: u64) -> BanditModel {
    let mut rng = Stream::for_purpose(model_seed(cfg, trial_index), Purpose::Model);
    sample_model(&cfg.prior, &mut rng)
}

/// Everything a trial needs that does not depend on the trial index.
struct Prepared {
    delta0: f64,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let delta0 = if cfg.policy.is_elimination() {
        delta0(&cfg.prior, cfg.delta)?
    } else {
        f64::NAN
    };
    Ok(Prepared { delta0 })
}

fn run_trial(cfg: &ExperimentConfig, prep: &Prepared, trial_index: u64) -> Result<TrialResult> {
    let model = trial_model(cfg, trial_index);
    let mut streams = TrialStreams::from_seed(model_seed(cfg, trial_index));
    let mut result = match cfg.policy {
        PolicyKind::Elim | PolicyKind::NoElim => {
            let sampling = if cfg.policy == PolicyKind::Elim {
                Sampling::Active
            } else {
                Sampling::All
            };
            let mut state = ElimState::new(cfg.prior.sigmas(), cfg.delta, prep.delta0, sampling)?;
            run_elimination(&mut state, &model, &mut streams, cfg.pull_cap)
        }
        PolicyKind::Ttts => run_top_two(
            &mut Ttts::new(&cfg.prior, cfg.delta)?,
            &model,
            &mut streams,
            cfg.pull_cap,
        ),
        PolicyKind::Ttucb => run_top_two(
            &mut Ttucb::new(&cfg.prior, cfg.delta)?,
            &model,
            &mut streams,
            cfg.pull_cap,
        ),
    };
    result.trial_index = trial_index;
    Ok(result)
}

/// Runs every trial on the current rayon pool; results are in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    let prep = prepare(cfg)?;
    let start = Instant::now();
    let results = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &prep, t))
        .collect::<Result<Vec<_>>>()?;
    let mut summary = aggregate(results)?;
    summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok(summary)
}

/// Runs on a dedicated pool of `workers` threads (`None`: rayon's default).
pub fn run_experiment_with(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Summary> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::invalid("workers", e.to_string()))?;
    pool.install(|| run_experiment(cfg))
}

/// Summarizes trial results. Truncated trials count toward the stopping
/// times (at the cap) but not toward the error rate.
pub fn aggregate(results: Vec<TrialResult>) -> Result<Summary> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    let n = results.len() as u64;
    let total: f64 = results.iter().map(|r| r.tau as f64).sum();
    let max_tau = results.iter().map(|r| r.tau).max().unwrap_or(0);
    let n_truncated = results.iter().filter(|r| r.truncated).count() as u64;
    let n_errors = results.iter().filter(|r| !r.truncated && !r.correct).count() as u64;
    let finished = n - n_truncated;
    let error_rate = if finished == 0 {
        0.0
    } else {
        n_errors as f64 / finished as f64
    };
    Ok(Summary {
        n_trials: n,
        avg_tau: total / n as f64,
        max_tau,
        error_rate,
        n_errors,
        n_truncated,
        wall_time_s: 0.0,
        per_trial: results,
    })
}
