//! Bayesian fixed-confidence best-arm identification for Gaussian bandits.
//!
//! Each arm's mean is drawn from an independent Gaussian prior; a policy then
//! pulls arms until it can name the best one with Bayesian error at most δ.
//! The crate provides the prior hardness quantities, the elimination
//! algorithm and its top-two baselines, the closed-form budgets, and a
//! seeded Monte Carlo harness.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod bandit;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod prior;
pub mod quadrature;
pub mod rng;

pub use algorithms::{PolicyKind, DEFAULT_PULL_CAP};
pub use bandit::{BanditModel, HistoryStats, StopReason, TrialResult};
pub use bounds::{upper_budget, BudgetReport};
pub use error::{Error, Result};
pub use harness::{run_experiment, ExperimentConfig, Summary};
pub use prior::{ArmPrior, Prior};
