//! Gaussian bandit models, pull bookkeeping and divergences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Gaussian KL divergence with common variance: `(a − b)² / (2σ²)`.
pub fn kl_gaussian(a: f64, b: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    Ok(kl_gaussian_unchecked(a, b, sigma))
}

#[inline]
pub(crate) fn kl_gaussian_unchecked(a: f64, b: f64, sigma: f64) -> f64 {
    let d = a - b;
    d * d / (2.0 * sigma * sigma)
}

/// Bernoulli KL divergence `d(a, b)`, with `0·log 0 = 0`.
pub fn kl_bernoulli(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::invalid("a", format!("must lie in [0, 1], got {a}")));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::invalid("b", format!("must lie in (0, 1), got {b}")));
    }
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    Ok(term(a, b) + term(1.0 - a, 1.0 - b))
}

/// One realization of the arm means together with the known noise levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditModel {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl BanditModel {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::invalid(
                "model",
                format!("{} means but {} noise levels", mu.len(), sigma.len()),
            ));
        }
        if mu.len() < 2 {
            return Err(Error::invalid("model", "need at least 2 arms"));
        }
        if sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid(
                "model",
                "means must be finite and noise levels positive",
            ));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn best(&self) -> usize {
        best_and_second(&self.mu).0
    }

    /// `μ_i* − μ_j*`.
    pub fn gap(&self) -> f64 {
        let (i, j) = best_and_second(&self.mu);
        self.mu[i] - self.mu[j]
    }

    /// Whether `arm` attains the maximum mean. Under exact ties every
    /// maximizer counts.
    pub fn is_best(&self, arm: usize) -> bool {
        self.mu[arm] == self.mu[self.best()]
    }

    /// Model with every mean shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            mu: self.mu.iter().map(|m| m + c).collect(),
            sigma: self.sigma.clone(),
        }
    }

    #[inline]
    pub(crate) fn draw(&self, arm: usize, rng: &mut Stream) -> f64 {
        rng.normal(self.mu[arm], self.sigma[arm])
    }
}

/// Reward `X ~ N(μ_arm, σ_arm²)`.
pub fn sample_reward(model: &BanditModel, arm: usize, rng: &mut Stream) -> Result<f64> {
    if arm >= model.k() {
        return Err(Error::ArmOutOfRange {
            index: arm,
            k: model.k(),
        });
    }
    Ok(model.draw(arm, rng))
}

/// Best and second-best arm, ties broken towards the lower index.
pub fn best_and_second(mu: &[f64]) -> (usize, usize) {
    debug_assert!(mu.len() >= 2);
    let (mut first, mut second) = if mu[1] > mu[0] { (1, 0) } else { (0, 1) };
    for (i, &x) in mu.iter().enumerate().skip(2) {
        if x > mu[first] {
            second = first;
            first = i;
        } else if x > mu[second] {
            second = i;
        }
    }
    (first, second)
}

/// Observable history: pull counts, reward sums and the clock `t`
/// (one more than the number of pulls so far).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryStats {
    pulls: Vec<u64>,
    sums: Vec<f64>,
    clock: u64,
}

impl HistoryStats {
    pub fn new(k: usize) -> Self {
        Self {
            pulls: vec![0; k],
            sums: vec![0.0; k],
            clock: 1,
        }
    }

    #[inline]
    pub fn record_pull(&mut self, arm: usize, reward: f64) {
        self.pulls[arm] += 1;
        self.sums[arm] += reward;
        self.clock += 1;
    }

    pub fn k(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Total number of pulls so far.
    pub fn total(&self) -> u64 {
        self.clock - 1
    }

    #[inline]
    pub fn count(&self, arm: usize) -> u64 {
        self.pulls[arm]
    }

    /// Empirical mean; `None` for an arm never pulled.
    #[inline]
    pub fn mean(&self, arm: usize) -> Option<f64> {
        match self.pulls[arm] {
            0 => None,
            n => Some(self.sums[arm] / n as f64),
        }
    }

    /// Arm with the highest empirical mean among pulled arms, lowest index on ties.
    pub fn empirical_best(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for arm in 0..self.k() {
            if let Some(m) = self.mean(arm) {
                if best.is_none_or(|(_, b)| m > b) {
                    best = Some((arm, m));
                }
            }
        }
        best.map(|(a, _)| a)
    }
}

/// Functional form of [`HistoryStats::record_pull`].
pub fn record_pull(mut stats: HistoryStats, arm: usize, reward: f64) -> HistoryStats {
    stats.record_pull(arm, reward);
    stats
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    /// One arm survived elimination.
    SingleSurvivor,
    /// The safe gap fell below the indifference gap.
    EarlyStop,
    /// A baseline's stopping statistic crossed its threshold.
    BaselineThreshold,
    /// The per-trial pull cap was reached.
    PullCap,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::SingleSurvivor => "SingleSurvivor",
            StopReason::EarlyStop => "EarlyStop",
            StopReason::BaselineThreshold => "BaselineThreshold",
            StopReason::PullCap => "PullCap",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coverage bookkeeping for elimination trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationDiagnostics {
    pub rounds: u64,
    /// Some active arm's interval missed its true mean in some round.
    pub interval_miss: bool,
    /// A best arm was in the active set after every round.
    pub best_always_active: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u64,
    pub seed: u64,
    pub tau: u64,
    pub recommendation: usize,
    pub correct: bool,
    pub pulls: Vec<u64>,
    pub stop_reason: StopReason,
    pub truncated: bool,
    pub diagnostics: Option<EliminationDiagnostics>,
}
