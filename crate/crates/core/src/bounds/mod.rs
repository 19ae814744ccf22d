//! Closed-form budgets and thresholds.
//!
//! Lower side: the sample floor `N_V` below which no Bayesian δ-correct
//! strategy exists, and the small-δ regime `δ_L` it is valid in. Upper side:
//! the constants `B`, `B₀`, `Δ_thr` and the per-arm budget `R₀(Δ)` that make
//! the elimination algorithm always stop within `T₀ = k R₀(Δ₀)` pulls.

mod lambert;
mod opt3;

pub use lambert::lambert_w0;
pub use opt3::{verify_opt3, Opt3Grid, Opt3Report};

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prior::{check_delta, delta0_from_l, hardness, l_total, Prior};

/// Reading of the `σ_min²` factor in `N_V`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMin {
    /// `(min_i σ_i)²`, the smallest reward variance.
    #[default]
    MinStdSquared,
    /// `(min_i σ_i²)²`, squaring the smallest variance again.
    MinVarianceSquared,
}

impl SigmaMin {
    fn factor(self, prior: &Prior) -> f64 {
        let s = prior.min_sigma();
        match self {
            SigmaMin::MinStdSquared => s * s,
            SigmaMin::MinVarianceSquared => s.powi(4),
        }
    }
}

/// `N_V = L(H)² σ_min² ln 2 / (16 e⁴ δ)` from a precomputed `L(H)`.
pub fn n_v_from_l(l: f64, sigma_min_sq: f64, delta: f64) -> f64 {
    l * l * sigma_min_sq * std::f64::consts::LN_2 / (16.0 * E.powi(4) * delta)
}

/// Lower-bound sample floor `N_V`.
pub fn n_v(prior: &Prior, delta: f64, reading: SigmaMin) -> Result<f64> {
    check_delta(delta)?;
    Ok(n_v_from_l(l_total(prior)?, reading.factor(prior), delta))
}

/// `B = 320 max σ_i²`.
pub fn budget_b(prior: &Prior) -> f64 {
    320.0 * prior.max_sigma().powi(2)
}

/// `Δ_thr = min(ln(4√k / (δπ)), 1/B)`.
pub fn delta_thr(k: usize, delta: f64, b: f64) -> f64 {
    (4.0 * (k as f64).sqrt() / (delta * PI)).ln().min(1.0 / b)
}

/// `R₀(Δ) = ⌈B ln(1/m) / m²⌉` with `m = min(Δ, Δ_thr)`, saturating at `u64::MAX`.
pub fn r0(gap: f64, b: f64, delta_thr: f64) -> u64 {
    let m = gap.min(delta_thr);
    let r = (b * (1.0 / m).ln() / (m * m)).ceil();
    if r >= u64::MAX as f64 {
        u64::MAX
    } else {
        r as u64
    }
}

/// Every budget constant for one prior and confidence level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub k: usize,
    pub delta: f64,
    pub l_total: f64,
    pub delta0: f64,
    pub b: f64,
    pub b0: f64,
    pub delta_thr: f64,
    pub r0_of_delta0: u64,
    pub t0: u64,
    pub n_v: f64,
    pub delta_l: f64,
    pub d0: f64,
    pub d1: f64,
    pub d0_negative: bool,
}

pub fn upper_budget(prior: &Prior, delta: f64) -> Result<BudgetReport> {
    upper_budget_with(prior, delta, SigmaMin::default())
}

pub fn upper_budget_with(prior: &Prior, delta: f64, reading: SigmaMin) -> Result<BudgetReport> {
    check_delta(delta)?;
    let l = l_total(prior)?;
    let delta0 = delta0_from_l(l, delta)?;
    let k = prior.k();
    let b = budget_b(prior);
    let thr = delta_thr(k, delta, b);
    let r0_of_delta0 = r0(delta0, b, thr);
    let small = small_delta_thresholds_from_l(prior, l);
    Ok(BudgetReport {
        k,
        delta,
        l_total: l,
        delta0,
        b,
        b0: (PI * PI / 3.0 + 1.0) * b,
        delta_thr: thr,
        r0_of_delta0,
        t0: r0_of_delta0.saturating_mul(k as u64),
        n_v: n_v_from_l(l, reading.factor(prior), delta),
        delta_l: small.delta_l,
        d0: small.d0,
        d1: small.d1,
        d0_negative: small.d0_negative,
    })
}

/// Regularity thresholds for the lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallDeltaThresholds {
    pub delta_l: f64,
    pub d0: f64,
    pub d1: f64,
    /// `D₀` as written is `W₀` of a negative argument and so negative; this
    /// flags that case, in which `δ_L` is not a usable threshold either.
    pub d0_negative: bool,
}

pub fn small_delta_thresholds(prior: &Prior) -> Result<SmallDeltaThresholds> {
    let l = hardness(prior)?.total;
    Ok(small_delta_thresholds_from_l(prior, l))
}

fn small_delta_thresholds_from_l(prior: &Prior, l: f64) -> SmallDeltaThresholds {
    let arms = prior.arms();
    let k = arms.len();

    let max_xi = prior.max_xi();
    let d0 = if max_xi > (E * E / 1024.0).cbrt() {
        // The argument is ≥ −1/e exactly when max ξ exceeds the cutoff.
        lambert_w0(-1.0 / (32.0 * max_xi.powf(1.5))).unwrap_or(-1.0)
    } else {
        1.0
    };

    let mut d1 = f64::INFINITY;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let (a, b) = (arms[i], arms[j]);
            let diff = (a.m / (a.sigma * a.sigma) - b.m / (b.sigma * b.sigma)).abs();
            if diff > 0.0 {
                d1 = d1.min(1.0 / diff);
            }
            let curvature = 1.0 / (2.0 * a.sigma * a.sigma) + 1.0 / (2.0 * b.sigma * b.sigma);
            d1 = d1.min(curvature.powi(-2));
        }
    }

    let mean_term = arms
        .iter()
        .filter(|a| a.m != 0.0)
        .map(|a| 1.0 / (4.0 * a.m * a.m))
        .fold(f64::INFINITY, f64::min);
    let inv_xi_sum: f64 = arms.iter().map(|a| 1.0 / a.xi).sum();
    let volume_term = l / (4.0 * (k as f64 - 1.0) * inv_xi_sum);

    let min = d0.min(d1).min(mean_term).min(volume_term);
    SmallDeltaThresholds {
        delta_l: l / (32.0 * E.powi(4)) * min,
        d0,
        d1,
        d0_negative: d0 < 0.0,
    }
}
