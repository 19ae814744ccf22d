//! Successive elimination with early stopping, and its no-elimination variant.
//!
//! Each round pulls every arm of the sampling set once, builds
//! `[μ̂_i − Conf(i), μ̂_i + Conf(i)]` for the active arms, drops every arm whose
//! upper bound is at or below the largest lower bound, and then stops if one
//! arm is left or if the safe gap `max UCB − max LCB` is at most `Δ₀`.

use std::f64::consts::PI;

use crate::bandit::{BanditModel, EliminationDiagnostics, HistoryStats, StopReason, TrialResult};
use crate::error::{Error, Result};
use crate::prior::{check_delta, delta0, Prior};
use crate::rng::Stream;

use super::{run_policy, Policy, TrialStreams, DEFAULT_PULL_CAP};

/// `Conf = sqrt(2σ² · ln(6n² / ((δ²/2k) π²)) / n)`.
pub fn conf_width(sigma: f64, n: u64, delta: f64, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "confidence width needs at least one pull"));
    }
    check_delta(delta)?;
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    if k < 2 {
        return Err(Error::invalid("k", "need at least 2 arms"));
    }
    Ok(sigma * width_factor(n, conf_denominator(delta, k)))
}

#[inline]
fn conf_denominator(delta: f64, k: usize) -> f64 {
    delta * delta / (2.0 * k as f64) * PI * PI
}

/// `sqrt(2 ln(6n²/denominator) / n)`, the width for unit noise.
#[inline]
fn width_factor(n: u64, denominator: f64) -> f64 {
    let n = n as f64;
    (2.0 * (6.0 * n * n / denominator).ln() / n).sqrt()
}

/// Which arms a round pulls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Only the active arms (successive elimination).
    Active,
    /// Every arm, every round; elimination only narrows the stopping test.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmBounds {
    pub arm: usize,
    pub lcb: f64,
    pub ucb: f64,
}

#[derive(Clone, Debug)]
pub struct ElimState {
    active: Vec<usize>,
    stats: HistoryStats,
    delta: f64,
    delta0: f64,
    sigma: Vec<f64>,
    sampling: Sampling,
    denominator: f64,
    rounds: u64,
    /// Bounds of the arms that were active when the last round was evaluated.
    last_bounds: Vec<ArmBounds>,
}

impl ElimState {
    pub fn new(sigma: Vec<f64>, delta: f64, delta0: f64, sampling: Sampling) -> Result<Self> {
        check_delta(delta)?;
        let k = sigma.len();
        if k < 2 {
            return Err(Error::invalid("k", "need at least 2 arms"));
        }
        if sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::invalid("sigma", "noise levels must be positive"));
        }
        if !(delta0 > 0.0 && delta0.is_finite()) {
            return Err(Error::invalid("delta0", format!("must be positive, got {delta0}")));
        }
        Ok(Self {
            active: (0..k).collect(),
            stats: HistoryStats::new(k),
            delta,
            delta0,
            denominator: conf_denominator(delta, k),
            sigma,
            sampling,
            rounds: 0,
            last_bounds: Vec::with_capacity(k),
        })
    }

    /// State for `prior`, with `Δ₀ = δ / (4 L(H))`.
    pub fn for_prior(prior: &Prior, delta: f64, sampling: Sampling) -> Result<Self> {
        Self::new(prior.sigmas(), delta, delta0(prior, delta)?, sampling)
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn last_bounds(&self) -> &[ArmBounds] {
        &self.last_bounds
    }

    pub fn stats(&self) -> &HistoryStats {
        &self.stats
    }

    /// `(LCB, UCB)` of `arm` from the current statistics.
    pub fn bounds(&self, arm: usize) -> Result<(f64, f64)> {
        if arm >= self.k() {
            return Err(Error::ArmOutOfRange {
                index: arm,
                k: self.k(),
            });
        }
        self.bounds_of(arm).ok_or(Error::Unpulled(arm))
    }

    #[inline]
    fn bounds_of(&self, arm: usize) -> Option<(f64, f64)> {
        let n = self.stats.count(arm);
        let mean = self.stats.mean(arm)?;
        let conf = self.sigma[arm] * width_factor(n, self.denominator);
        Some((mean - conf, mean + conf))
    }

    /// `max UCB − max LCB` over the active set, clamped at zero.
    pub fn safe_gap(&self) -> Result<f64> {
        let mut max_ucb = f64::NEG_INFINITY;
        let mut max_lcb = f64::NEG_INFINITY;
        for &arm in &self.active {
            let (lcb, ucb) = self.bounds_of(arm).ok_or(Error::Unpulled(arm))?;
            max_ucb = max_ucb.max(ucb);
            max_lcb = max_lcb.max(lcb);
        }
        Ok((max_ucb - max_lcb).max(0.0))
    }

    /// Pulls each arm of the round once and applies the elimination test.
    pub fn elim_round(&mut self, model: &BanditModel, rng: &mut Stream) -> Result<()> {
        if self.active.len() < 2 {
            return Err(Error::invalid("active", "a round needs at least two active arms"));
        }
        let mut batch = Vec::with_capacity(self.k());
        self.fill_round(&mut batch);
        for arm in batch {
            let reward = model.draw(arm, rng);
            self.stats.record_pull(arm, reward);
        }
        self.eliminate();
        Ok(())
    }

    fn fill_round(&self, out: &mut Vec<usize>) {
        match self.sampling {
            Sampling::Active => out.extend_from_slice(&self.active),
            Sampling::All => out.extend(0..self.k()),
        }
    }

    /// Removes, in one pass, every active arm whose UCB is at or below the
    /// largest LCB of the round's active set.
    fn eliminate(&mut self) {
        self.rounds += 1;
        self.last_bounds.clear();
        let mut max_lcb = f64::NEG_INFINITY;
        for &arm in &self.active {
            let (lcb, ucb) = self.bounds_of(arm).expect("active arms are pulled every round");
            max_lcb = max_lcb.max(lcb);
            self.last_bounds.push(ArmBounds { arm, lcb, ucb });
        }
        let bounds = &self.last_bounds;
        let mut idx = 0;
        self.active.retain(|_| {
            let keep = bounds[idx].ucb > max_lcb;
            idx += 1;
            keep
        });
    }

    fn stop_test(&self) -> Option<StopReason> {
        if self.active.len() == 1 {
            return Some(StopReason::SingleSurvivor);
        }
        let gap = self.safe_gap().expect("active arms are pulled every round");
        (gap <= self.delta0).then_some(StopReason::EarlyStop)
    }
}

impl Policy for ElimState {
    fn stats(&self) -> &HistoryStats {
        &self.stats
    }

    fn stats_mut(&mut self) -> &mut HistoryStats {
        &mut self.stats
    }

    fn next_arms(&mut self, _rng: &mut Stream, out: &mut Vec<usize>) {
        self.fill_round(out);
    }

    fn should_stop(&mut self) -> Option<StopReason> {
        self.eliminate();
        self.stop_test()
    }

    fn recommend(&mut self, rng: &mut Stream) -> usize {
        match self.active.len() {
            1 => self.active[0],
            n => self.active[rng.index(n)],
        }
    }

    fn truncated_recommendation(&self) -> usize {
        // Best empirical mean among the survivors.
        let mut best = self.active[0];
        for &arm in &self.active[1..] {
            if self.stats.mean(arm) > self.stats.mean(best) {
                best = arm;
            }
        }
        best
    }
}

/// Runs an elimination policy to completion, recording whether any computed
/// interval missed its true mean and whether a best arm stayed active.
pub fn run_elimination(
    state: &mut ElimState,
    model: &BanditModel,
    streams: &mut TrialStreams,
    pull_cap: u64,
) -> TrialResult {
    let mut diagnostics = EliminationDiagnostics {
        rounds: 0,
        interval_miss: false,
        best_always_active: true,
    };
    let mu = model.mu();
    let outcome = run_policy(state, model, streams, pull_cap, |s: &ElimState| {
        if s.last_bounds()
            .iter()
            .any(|b| !(b.lcb <= mu[b.arm] && mu[b.arm] <= b.ucb))
        {
            diagnostics.interval_miss = true;
        }
        if !s.active().iter().any(|&a| model.is_best(a)) {
            diagnostics.best_always_active = false;
        }
    });
    diagnostics.rounds = state.rounds();
    TrialResult {
        trial_index: 0,
        seed: streams.seed,
        tau: outcome.tau,
        recommendation: outcome.recommendation,
        correct: model.is_best(outcome.recommendation),
        pulls: outcome.pulls,
        stop_reason: outcome.stop_reason,
        truncated: outcome.truncated,
        diagnostics: Some(diagnostics),
    }
}

/// Successive elimination with early stopping.
pub fn elim_policy_run(
    model: &BanditModel,
    prior: &Prior,
    delta: f64,
    streams: &mut TrialStreams,
) -> Result<TrialResult> {
    let mut state = ElimState::for_prior(prior, delta, Sampling::Active)?;
    Ok(run_elimination(&mut state, model, streams, DEFAULT_PULL_CAP))
}

/// As [`elim_policy_run`], but every round samples all k arms.
pub fn noelim_policy_run(
    model: &BanditModel,
    prior: &Prior,
    delta: f64,
    streams: &mut TrialStreams,
) -> Result<TrialResult> {
    let mut state = ElimState::for_prior(prior, delta, Sampling::All)?;
    Ok(run_elimination(&mut state, model, streams, DEFAULT_PULL_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::upper_budget;

    fn state(stats: &[(usize, &[f64])], k: usize) -> ElimState {
        let mut s = ElimState::new(vec![1.0; k], 0.1, 0.01, Sampling::Active).unwrap();
        for (arm, rewards) in stats {
            for r in *rewards {
                s.stats.record_pull(*arm, *r);
            }
        }
        s
    }

    #[test]
    fn conf_width_examples() {
        let w = conf_width(1.0, 100, 0.1, 2).unwrap();
        assert!((w - 0.542_293_363_717_709_9).abs() < 1e-12, "{w}");
        assert_eq!(conf_width(2.0, 100, 0.1, 2).unwrap(), 2.0 * w);
        let tiny = conf_width(1.0, 100_000_000, 0.1, 2).unwrap();
        assert!(tiny < 1e-3);
        assert!((tiny - 9.201_643_954_483_565e-4).abs() < 1e-15);
        assert!(conf_width(1.0, 0, 0.1, 2).is_err());
        assert!(conf_width(1.0, 1, 1.0, 2).is_err());
    }

    #[test]
    fn conf_width_decreasing() {
        let mut prev = f64::INFINITY;
        for n in 1..5000u64 {
            let w = conf_width(1.0, n, 0.5, 2).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn bounds_are_symmetric() {
        let s = state(&[(0, &[0.7])], 2);
        let (lcb, ucb) = s.bounds(0).unwrap();
        assert!((0.5 * (lcb + ucb) - 0.7).abs() < 1e-15);
        let conf = conf_width(1.0, 1, 0.1, 2).unwrap();
        assert!((ucb - lcb - 2.0 * conf).abs() < 1e-12);
        assert!(matches!(s.bounds(1), Err(Error::Unpulled(1))));
        assert!(matches!(s.bounds(2), Err(Error::ArmOutOfRange { .. })));
    }

    #[test]
    fn separated_intervals_eliminate() {
        // One pull each: Conf(1) ≈ 4.1 for δ = 0.1, so means 20 apart separate.
        let mut s = state(&[(0, &[0.0]), (1, &[20.0])], 2);
        s.eliminate();
        assert_eq!(s.active(), &[1]);
        assert_eq!(s.stop_test(), Some(StopReason::SingleSurvivor));
    }

    #[test]
    fn overlapping_intervals_keep_both() {
        let mut s = state(&[(0, &[0.0]), (1, &[1.0])], 2);
        s.eliminate();
        assert_eq!(s.active(), &[0, 1]);
    }

    #[test]
    fn safe_gap_of_identical_arms_is_twice_conf() {
        let s = state(&[(0, &[0.3, 0.5]), (1, &[0.5, 0.3])], 2);
        let conf = conf_width(1.0, 2, 0.1, 2).unwrap();
        assert!((s.safe_gap().unwrap() - 2.0 * conf).abs() < 1e-12);
    }

    #[test]
    fn safe_gap_requires_pulls() {
        let s = state(&[(0, &[0.3])], 2);
        assert!(matches!(s.safe_gap(), Err(Error::Unpulled(1))));
    }

    #[test]
    fn large_gap_is_eliminated_quickly() {
        let prior = Prior::standard(2).unwrap();
        let model = BanditModel::new(vec![5.0, -5.0], vec![1.0, 1.0]).unwrap();
        let mut fast = 0;
        for seed in 0..1000 {
            let mut s = ElimState::for_prior(&prior, 0.1, Sampling::Active).unwrap();
            let mut rng = Stream::from_seed(seed);
            for _ in 0..10 {
                s.elim_round(&model, &mut rng).unwrap();
                if s.active().len() == 1 {
                    break;
                }
            }
            if s.active() == [0] {
                fast += 1;
            }
        }
        assert!(fast >= 990, "{fast}");
    }

    #[test]
    fn large_gap_is_identified() {
        let prior = Prior::standard(2).unwrap();
        let model = BanditModel::new(vec![5.0, -5.0], vec![1.0, 1.0]).unwrap();
        let correct = (0..1000)
            .filter(|&seed| {
                let mut streams = TrialStreams::from_seed(seed);
                elim_policy_run(&model, &prior, 0.1, &mut streams).unwrap().correct
            })
            .count();
        assert!(correct >= 995, "{correct}");
    }

    #[test]
    fn exact_tie_stops_early() {
        let prior = Prior::standard(2).unwrap();
        let model = BanditModel::new(vec![0.25, 0.25], vec![1.0, 1.0]).unwrap();
        let budget = upper_budget(&prior, 0.1).unwrap();
        for seed in 0..20 {
            let mut streams = TrialStreams::from_seed(seed);
            let r = elim_policy_run(&model, &prior, 0.1, &mut streams).unwrap();
            assert_eq!(r.stop_reason, StopReason::EarlyStop);
            assert!(r.correct);
            assert!(r.tau <= budget.t0);
        }
    }

    #[test]
    fn safe_gap_shrinks_for_near_ties() {
        let model = BanditModel::new(vec![0.0, 1e-6], vec![1.0, 1.0]).unwrap();
        let mut s = ElimState::new(vec![1.0, 1.0], 0.1, 1e-9, Sampling::Active).unwrap();
        let mut rng = Stream::from_seed(5);
        let mut gaps = Vec::new();
        for round in 1..=200_000 {
            s.elim_round(&model, &mut rng).unwrap();
            if round % 50_000 == 0 {
                gaps.push(s.safe_gap().unwrap());
            }
        }
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[gaps.len() - 1] < 0.04);
    }

    #[test]
    fn noelim_matches_elim_while_both_active() {
        let prior = Prior::standard(2).unwrap();
        for seed in 0..50 {
            let model = crate::prior::sample_model(&prior, &mut Stream::from_seed(1000 + seed));
            let mut a = ElimState::for_prior(&prior, 0.1, Sampling::Active).unwrap();
            let mut b = ElimState::for_prior(&prior, 0.1, Sampling::All).unwrap();
            let mut ra = Stream::from_seed(seed);
            let mut rb = Stream::from_seed(seed);
            loop {
                a.elim_round(&model, &mut ra).unwrap();
                b.elim_round(&model, &mut rb).unwrap();
                assert_eq!(a.stats(), b.stats());
                assert_eq!(a.active(), b.active());
                if a.active().len() < 2 || a.stop_test().is_some() {
                    break;
                }
            }
        }
    }
}
