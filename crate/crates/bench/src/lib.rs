//! Fixtures shared by the benchmarks.

use bayesbai_core::{ExperimentConfig, PolicyKind, Prior};

pub fn standard_prior(k: usize) -> Prior {
    Prior::standard(k).expect("k >= 2")
}

pub fn elim_config(k: usize, delta: f64, n_trials: u64) -> ExperimentConfig {
    ExperimentConfig::new(standard_prior(k), delta, PolicyKind::Elim, n_trials, 7)
}
