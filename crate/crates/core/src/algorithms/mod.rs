//! Sampling, stopping and recommendation rules.
//!
//! Every policy implements [`Policy`] and is driven by [`run_policy`], which
//! owns the pull loop, the reward stream and the pull cap. Policies only see
//! their own [`HistoryStats`]; the true model never leaks into a decision.

mod elimination;
mod top_two;

pub use elimination::{
    conf_width, elim_policy_run, noelim_policy_run, run_elimination, ArmBounds, ElimState, Sampling,
};
pub(crate) use top_two::run_top_two;
pub use top_two::{
    chernoff_statistic, ttts_policy_run, ttucb_policy_run, ttucb_threshold, TopTwoState, Ttts, Ttucb,
    CHALLENGER_RESAMPLES,
};

use serde::{Deserialize, Serialize};

use crate::bandit::{BanditModel, HistoryStats, StopReason};
use crate::rng::{trial_seed, Purpose, Stream};

/// Default per-trial pull cap.
pub const DEFAULT_PULL_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Elim,
    NoElim,
    Ttts,
    Ttucb,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Elim,
        PolicyKind::NoElim,
        PolicyKind::Ttts,
        PolicyKind::Ttucb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Elim => "elim",
            PolicyKind::NoElim => "noelim",
            PolicyKind::Ttts => "ttts",
            PolicyKind::Ttucb => "ttucb",
        }
    }

    pub fn is_elimination(&self) -> bool {
        matches!(self, PolicyKind::Elim | PolicyKind::NoElim)
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "elim" => Ok(PolicyKind::Elim),
            "noelim" => Ok(PolicyKind::NoElim),
            "ttts" => Ok(PolicyKind::Ttts),
            "ttucb" => Ok(PolicyKind::Ttucb),
            other => Err(format!(
                "unknown policy `{other}` (expected elim, noelim, ttts or ttucb)"
            )),
        }
    }
}

/// The random streams a single trial consumes once its model is fixed.
#[derive(Clone, Debug)]
pub struct TrialStreams {
    pub seed: u64,
    pub reward: Stream,
    pub sampling: Stream,
    pub recommendation: Stream,
}

impl TrialStreams {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            reward: Stream::for_purpose(seed, Purpose::Reward),
            sampling: Stream::for_purpose(seed, Purpose::Sampling),
            recommendation: Stream::for_purpose(seed, Purpose::Recommendation),
        }
    }

    pub fn derive(master_seed: u64, trial_index: u64) -> Self {
        Self::from_seed(trial_seed(master_seed, trial_index))
    }
}

/// A fixed-confidence identification strategy.
pub trait Policy {
    fn stats(&self) -> &HistoryStats;

    fn stats_mut(&mut self) -> &mut HistoryStats;

    /// Arms to pull next, in order. Must depend only on the history.
    fn next_arms(&mut self, rng: &mut Stream, out: &mut Vec<usize>);

    /// Updates internal state after a batch of pulls and reports whether to stop.
    fn should_stop(&mut self) -> Option<StopReason>;

    /// Final answer; only called after `should_stop` fired.
    fn recommend(&mut self, rng: &mut Stream) -> usize;

    /// Answer to report when the pull cap cuts the trial short.
    fn truncated_recommendation(&self) -> usize {
        self.stats().empirical_best().unwrap_or(0)
    }
}

/// Outcome of one run of the pull loop.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub tau: u64,
    pub recommendation: usize,
    pub stop_reason: StopReason,
    pub truncated: bool,
    pub pulls: Vec<u64>,
}

/// Drives `policy` against `model` until it stops or `pull_cap` pulls have
/// been made. `observe` is called after every stopping check.
pub fn run_policy<P, F>(
    policy: &mut P,
    model: &BanditModel,
    streams: &mut TrialStreams,
    pull_cap: u64,
    mut observe: F,
) -> RunOutcome
where
    P: Policy,
    F: FnMut(&P),
{
    let mut batch = Vec::with_capacity(model.k());
    loop {
        batch.clear();
        policy.next_arms(&mut streams.sampling, &mut batch);
        for &arm in &batch {
            if policy.stats().total() >= pull_cap {
                let stats = policy.stats();
                return RunOutcome {
                    tau: stats.total(),
                    recommendation: policy.truncated_recommendation(),
                    stop_reason: StopReason::PullCap,
                    truncated: true,
                    pulls: stats.pulls().to_vec(),
                };
            }
            let reward = model.draw(arm, &mut streams.reward);
            policy.stats_mut().record_pull(arm, reward);
        }
        let stop = policy.should_stop();
        observe(policy);
        if let Some(stop_reason) = stop {
            let recommendation = policy.recommend(&mut streams.recommendation);
            let stats = policy.stats();
            return RunOutcome {
                tau: stats.total(),
                recommendation,
                stop_reason,
                truncated: false,
                pulls: stats.pulls().to_vec(),
            };
        }
    }
}
