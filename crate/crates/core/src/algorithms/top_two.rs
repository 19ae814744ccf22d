//! Frequentist top-two baselines: Top-Two Thompson Sampling with Chernoff's
//! stopping rule, and Top-Two UCB with its GLR-style threshold.
//!
//! Both start by pulling every arm once, then pull one arm per step and test
//! the stopping rule after every pull. They recommend the empirical best arm.

use crate::bandit::{kl_gaussian_unchecked, BanditModel, HistoryStats, StopReason, TrialResult};
use crate::error::{Error, Result};
use crate::prior::{check_delta, ArmPrior, Prior};
use crate::rng::Stream;

use super::elimination::conf_width;
use super::{run_policy, Policy, TrialStreams, DEFAULT_PULL_CAP};

/// Resamples TTTS attempts before falling back to the runner-up coordinate.
pub const CHALLENGER_RESAMPLES: usize = 32;

/// State shared by both top-two baselines.
#[derive(Clone, Debug)]
pub struct TopTwoState {
    pub stats: HistoryStats,
    pub delta: f64,
    pub beta: f64,
    pub prior: Prior,
    /// Times each arm has been the leader (TTUCB tracking).
    pub leader_counts: Vec<u64>,
    /// Times each arm was pulled while being the leader (TTUCB tracking).
    pub leader_pulls: Vec<u64>,
}

impl TopTwoState {
    pub fn new(prior: &Prior, delta: f64, beta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1), got {beta}")));
        }
        let k = prior.k();
        Ok(Self {
            stats: HistoryStats::new(k),
            delta,
            beta,
            prior: prior.clone(),
            leader_counts: vec![0; k],
            leader_pulls: vec![0; k],
        })
    }

    fn k(&self) -> usize {
        self.stats.k()
    }

    fn first_unpulled(&self) -> Option<usize> {
        self.stats.pulls().iter().position(|&n| n == 0)
    }

    #[inline]
    fn mean(&self, arm: usize) -> f64 {
        self.stats.sums()[arm] / self.stats.count(arm) as f64
    }

    fn sigma(&self, arm: usize) -> f64 {
        self.prior.arms()[arm].sigma
    }

    fn empirical_best(&self) -> usize {
        self.stats.empirical_best().unwrap_or(0)
    }
}

/// `max_a min_{b≠a} Z_ab` with
/// `Z_ab = N_a KL_a(μ̂_a, μ̂_ab) + N_b KL_b(μ̂_b, μ̂_ab)` and `μ̂_ab` the
/// pull-weighted mean of the pair. `Z_ab` is taken as zero when
/// `μ̂_a < μ̂_b`, so the maximum is attained at the empirical best arm.
/// Every arm must have been pulled.
pub fn chernoff_statistic(stats: &HistoryStats, sigma: &[f64]) -> f64 {
    let a = stats.empirical_best().expect("all arms pulled");
    let na = stats.count(a) as f64;
    let ma = stats.sums()[a] / na;
    let mut min = f64::INFINITY;
    for b in 0..stats.k() {
        if b == a {
            continue;
        }
        let nb = stats.count(b) as f64;
        let mb = stats.sums()[b] / nb;
        let pooled = (na * ma + nb * mb) / (na + nb);
        let z = na * kl_gaussian_unchecked(ma, pooled, sigma[a]) + nb * kl_gaussian_unchecked(mb, pooled, sigma[b]);
        min = min.min(z);
    }
    min
}

/// `c(n, δ) = 2 C_G(½ ln((k−1)/δ)) + 4 ln(4 + ln(n/2))` with
/// `C_G(x) ≈ x + ln x`.
pub fn ttucb_threshold(n: u64, delta: f64, k: usize) -> f64 {
    let x = 0.5 * ((k as f64 - 1.0) / delta).ln();
    2.0 * (x + x.ln()) + 4.0 * (4.0 + (n as f64 / 2.0).ln()).ln()
}

/// Top-Two Thompson Sampling with a conjugate Gaussian posterior.
#[derive(Clone, Debug)]
pub struct Ttts {
    pub state: TopTwoState,
    sigma: Vec<f64>,
    theta: Vec<f64>,
}

impl Ttts {
    pub fn new(prior: &Prior, delta: f64) -> Result<Self> {
        Ok(Self {
            state: TopTwoState::new(prior, delta, 0.5)?,
            sigma: prior.sigmas(),
            theta: vec![0.0; prior.k()],
        })
    }

    /// Posterior mean and sd of arm `i` given its pulls.
    pub fn posterior(&self, arm: usize) -> (f64, f64) {
        let ArmPrior { m, xi, sigma } = self.state.prior.arms()[arm];
        let precision = 1.0 / (xi * xi) + self.state.stats.count(arm) as f64 / (sigma * sigma);
        let mean = (m / (xi * xi) + self.state.stats.sums()[arm] / (sigma * sigma)) / precision;
        (mean, precision.sqrt().recip())
    }

    fn sample_posterior(&mut self, rng: &mut Stream) -> usize {
        for arm in 0..self.theta.len() {
            let (mean, sd) = self.posterior(arm);
            self.theta[arm] = rng.normal(mean, sd);
        }
        argmax(&self.theta)
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..xs.len() {
        if xs[i] > xs[best] {
            best = i;
        }
    }
    best
}

fn runner_up(xs: &[f64], leader: usize) -> usize {
    let mut best = if leader == 0 { 1 } else { 0 };
    for i in 0..xs.len() {
        if i != leader && xs[i] > xs[best] {
            best = i;
        }
    }
    best
}

impl Policy for Ttts {
    fn stats(&self) -> &HistoryStats {
        &self.state.stats
    }

    fn stats_mut(&mut self) -> &mut HistoryStats {
        &mut self.state.stats
    }

    fn next_arms(&mut self, rng: &mut Stream, out: &mut Vec<usize>) {
        if let Some(arm) = self.state.first_unpulled() {
            out.push(arm);
            return;
        }
        let leader = self.sample_posterior(rng);
        if rng.uniform() < self.state.beta {
            out.push(leader);
            return;
        }
        for _ in 0..CHALLENGER_RESAMPLES {
            let candidate = self.sample_posterior(rng);
            if candidate != leader {
                out.push(candidate);
                return;
            }
        }
        out.push(runner_up(&self.theta, leader));
    }

    fn should_stop(&mut self) -> Option<StopReason> {
        if self.state.first_unpulled().is_some() {
            return None;
        }
        let t = self.state.stats.total() as f64;
        let threshold = (t / self.state.delta).ln();
        (chernoff_statistic(&self.state.stats, &self.sigma) >= threshold).then_some(StopReason::BaselineThreshold)
    }

    fn recommend(&mut self, _rng: &mut Stream) -> usize {
        self.state.empirical_best()
    }
}

/// Top-Two UCB: UCB leader, transport-cost challenger, ½-tracking.
#[derive(Clone, Debug)]
pub struct Ttucb {
    pub state: TopTwoState,
}

impl Ttucb {
    pub fn new(prior: &Prior, delta: f64) -> Result<Self> {
        Ok(Self {
            state: TopTwoState::new(prior, delta, 0.5)?,
        })
    }

    fn leader(&self) -> usize {
        let s = &self.state;
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for arm in 0..s.k() {
            let conf = conf_width(s.sigma(arm), s.stats.count(arm), s.delta, s.k()).expect("valid state");
            let index = s.mean(arm) + conf;
            if index > best_index {
                best = arm;
                best_index = index;
            }
        }
        best
    }

    /// `(μ̂_a − μ̂_b) / sqrt(σ_a²/N_a + σ_b²/N_b)`.
    fn transport(&self, a: usize, b: usize) -> f64 {
        let s = &self.state;
        let var = s.sigma(a).powi(2) / s.stats.count(a) as f64 + s.sigma(b).powi(2) / s.stats.count(b) as f64;
        (s.mean(a) - s.mean(b)) / var.sqrt()
    }

    fn challenger(&self, leader: usize) -> usize {
        let mut best = if leader == 0 { 1 } else { 0 };
        let mut best_cost = f64::INFINITY;
        for arm in 0..self.state.k() {
            if arm == leader {
                continue;
            }
            let cost = self.transport(leader, arm);
            if cost < best_cost {
                best = arm;
                best_cost = cost;
            }
        }
        best
    }
}

impl Policy for Ttucb {
    fn stats(&self) -> &HistoryStats {
        &self.state.stats
    }

    fn stats_mut(&mut self) -> &mut HistoryStats {
        &mut self.state.stats
    }

    fn next_arms(&mut self, _rng: &mut Stream, out: &mut Vec<usize>) {
        if let Some(arm) = self.state.first_unpulled() {
            out.push(arm);
            return;
        }
        let leader = self.leader();
        self.state.leader_counts[leader] += 1;
        let target = self.state.beta * self.state.leader_counts[leader] as f64;
        if self.state.leader_pulls[leader] as f64 <= target {
            self.state.leader_pulls[leader] += 1;
            out.push(leader);
        } else {
            out.push(self.challenger(leader));
        }
    }

    fn should_stop(&mut self) -> Option<StopReason> {
        if self.state.first_unpulled().is_some() {
            return None;
        }
        let best = self.state.empirical_best();
        let mut min = f64::INFINITY;
        for arm in 0..self.state.k() {
            if arm != best {
                min = min.min(self.transport(best, arm));
            }
        }
        let threshold = ttucb_threshold(self.state.stats.total(), self.state.delta, self.state.k());
        (min >= threshold.sqrt()).then_some(StopReason::BaselineThreshold)
    }

    fn recommend(&mut self, _rng: &mut Stream) -> usize {
        self.state.empirical_best()
    }
}

fn into_trial(outcome: super::RunOutcome, model: &BanditModel, seed: u64) -> TrialResult {
    TrialResult {
        trial_index: 0,
        seed,
        tau: outcome.tau,
        recommendation: outcome.recommendation,
        correct: model.is_best(outcome.recommendation),
        pulls: outcome.pulls,
        stop_reason: outcome.stop_reason,
        truncated: outcome.truncated,
        diagnostics: None,
    }
}

pub(crate) fn run_top_two<P: Policy>(
    policy: &mut P,
    model: &BanditModel,
    streams: &mut TrialStreams,
    pull_cap: u64,
) -> TrialResult {
    let outcome = run_policy(policy, model, streams, pull_cap, |_| {});
    into_trial(outcome, model, streams.seed)
}

pub fn ttts_policy_run(
    model: &BanditModel,
    prior: &Prior,
    delta: f64,
    streams: &mut TrialStreams,
) -> Result<TrialResult> {
    let mut policy = Ttts::new(prior, delta)?;
    Ok(run_top_two(&mut policy, model, streams, DEFAULT_PULL_CAP))
}

pub fn ttucb_policy_run(
    model: &BanditModel,
    prior: &Prior,
    delta: f64,
    streams: &mut TrialStreams,
) -> Result<TrialResult> {
    let mut policy = Ttucb::new(prior, delta)?;
    Ok(run_top_two(&mut policy, model, streams, DEFAULT_PULL_CAP))
}
