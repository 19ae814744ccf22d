//! Gaussian priors over bandit models and the prior-hardness constant.
//!
//! `L_ij(H) = ∫ h_i(x) h_j(x) Π_{s ∉ {i,j}} H_s(x) dx` is the density of the
//! event "arms i and j are the top two and tied"; summed over ordered pairs it
//! gives `L(H)`, which fixes the indifference gap `Δ₀ = δ / (4 L(H))`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::bandit::{best_and_second, BanditModel};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, Tolerance};
use crate::rng::Stream;

/// Half-width of the integration domain, in prior standard deviations.
pub const DOMAIN_SDS: f64 = 10.0;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_87;

/// Prior and noise parameters of a single arm: `μ ~ N(m, xi²)`, rewards
/// `X ~ N(μ, sigma²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmPrior {
    pub m: f64,
    pub xi: f64,
    pub sigma: f64,
}

impl ArmPrior {
    pub fn new(m: f64, xi: f64, sigma: f64) -> Result<Self> {
        let arm = Self { m, xi, sigma };
        arm.validate()?;
        Ok(arm)
    }

    /// `N(0, 1)` prior with unit reward noise.
    pub fn standard() -> Self {
        Self {
            m: 0.0,
            xi: 1.0,
            sigma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.xi.is_finite() && self.sigma.is_finite()) {
            return Err(Error::invalid("arm", "m, xi and sigma must be finite"));
        }
        if self.xi <= 0.0 {
            return Err(Error::invalid("xi", format!("must be positive, got {}", self.xi)));
        }
        if self.sigma <= 0.0 {
            return Err(Error::invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        let z = (x - self.m) / self.xi;
        INV_SQRT_2PI / self.xi * (-0.5 * z * z).exp()
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(-(x - self.m) / self.xi * FRAC_1_SQRT_2)
    }
}

/// Prior density `h(x)`.
pub fn prior_pdf(p: &ArmPrior, x: f64) -> f64 {
    p.pdf(x)
}

/// Prior distribution function `H(x)`.
pub fn prior_cdf(p: &ArmPrior, x: f64) -> f64 {
    p.cdf(x)
}

/// Independent Gaussian prior over the k arm means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ArmPrior>", into = "Vec<ArmPrior>")]
pub struct Prior {
    arms: Vec<ArmPrior>,
}

impl TryFrom<Vec<ArmPrior>> for Prior {
    type Error = Error;

    fn try_from(arms: Vec<ArmPrior>) -> Result<Self> {
        Prior::new(arms)
    }
}

impl From<Prior> for Vec<ArmPrior> {
    fn from(p: Prior) -> Self {
        p.arms
    }
}

impl Prior {
    pub fn new(arms: Vec<ArmPrior>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::invalid(
                "prior",
                format!("need at least 2 arms, got {}", arms.len()),
            ));
        }
        for arm in &arms {
            arm.validate()?;
        }
        Ok(Self { arms })
    }

    /// k arms with standard normal priors and unit noise.
    pub fn standard(k: usize) -> Result<Self> {
        Self::new(vec![ArmPrior::standard(); k])
    }

    pub fn arms(&self) -> &[ArmPrior] {
        &self.arms
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.sigma).collect()
    }

    pub fn max_sigma(&self) -> f64 {
        self.arms.iter().map(|a| a.sigma).fold(f64::MIN, f64::max)
    }

    pub fn min_sigma(&self) -> f64 {
        self.arms.iter().map(|a| a.sigma).fold(f64::MAX, f64::min)
    }

    pub fn max_xi(&self) -> f64 {
        self.arms.iter().map(|a| a.xi).fold(f64::MIN, f64::max)
    }

    /// Truncated integration domain `[min(m - 10ξ), max(m + 10ξ)]`.
    pub fn domain(&self) -> (f64, f64) {
        let lo = self
            .arms
            .iter()
            .map(|a| a.m - DOMAIN_SDS * a.xi)
            .fold(f64::MAX, f64::min);
        let hi = self
            .arms
            .iter()
            .map(|a| a.m + DOMAIN_SDS * a.xi)
            .fold(f64::MIN, f64::max);
        (lo, hi)
    }

    /// Initial quadrature panels: uniform, no wider than half the narrowest
    /// prior sd, with every prior mean added as a breakpoint.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.domain();
        let min_xi = self.arms.iter().map(|a| a.xi).fold(f64::MAX, f64::min);
        let panels = ((hi - lo) / (0.5 * min_xi)).ceil().clamp(8.0, 8192.0) as usize;
        let width = (hi - lo) / panels as f64;
        let mut breaks: Vec<f64> = (0..=panels).map(|i| lo + width * i as f64).collect();
        breaks[panels] = hi;
        breaks.extend(self.arms.iter().map(|a| a.m));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
    }

    fn check_arm(&self, i: usize) -> Result<()> {
        if i >= self.k() {
            return Err(Error::ArmOutOfRange { index: i, k: self.k() });
        }
        Ok(())
    }
}

/// Draws `μ_i ~ N(m_i, ξ_i²)` independently, in arm order.
pub fn sample_model(prior: &Prior, rng: &mut Stream) -> BanditModel {
    let mu = prior.arms.iter().map(|a| rng.normal(a.m, a.xi)).collect();
    BanditModel::new(mu, prior.sigmas()).expect("prior arms produce a consistent model")
}

/// `L_ij(H)` by adaptive quadrature. Symmetric in `(i, j)` bit for bit.
pub fn l_ij(prior: &Prior, i: usize, j: usize) -> Result<f64> {
    prior.check_arm(i)?;
    prior.check_arm(j)?;
    if i == j {
        return Err(Error::SamePair { i, j });
    }
    let (i, j) = (i.min(j), i.max(j));
    let arms = prior.arms();
    let f = |x: f64| {
        let mut v = arms[i].pdf(x) * arms[j].pdf(x);
        for (s, a) in arms.iter().enumerate() {
            if s != i && s != j {
                v *= a.cdf(x);
            }
        }
        v
    };
    Ok(integrate_panels(f, &prior.breakpoints(), Tolerance::default())?.value)
}

/// All pairwise `L_ij` and their total over ordered pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hardness {
    /// Row-major k×k matrix; the diagonal is zero.
    pub pairs: Vec<f64>,
    pub k: usize,
    pub total: f64,
}

impl Hardness {
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.pairs[i * self.k + j]
    }
}

pub fn hardness(prior: &Prior) -> Result<Hardness> {
    let k = prior.k();
    let mut pairs = vec![0.0; k * k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = l_ij(prior, i, j)?;
            pairs[i * k + j] = v;
            pairs[j * k + i] = v;
        }
    }
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                total += pairs[i * k + j];
            }
        }
    }
    Ok(Hardness { pairs, k, total })
}

/// `L(H) = Σ_{i≠j} L_ij(H)`.
pub fn l_total(prior: &Prior) -> Result<f64> {
    Ok(hardness(prior)?.total)
}

/// `P(i*(μ) = i) = ∫ h_i(x) Π_{s≠i} H_s(x) dx`.
pub fn prob_best(prior: &Prior, i: usize) -> Result<f64> {
    prior.check_arm(i)?;
    let arms = prior.arms();
    let f = |x: f64| {
        let mut v = arms[i].pdf(x);
        for (s, a) in arms.iter().enumerate() {
            if s != i {
                v *= a.cdf(x);
            }
        }
        v
    };
    Ok(integrate_panels(f, &prior.breakpoints(), Tolerance::default())?.value)
}

/// Indifference gap `Δ₀ = δ / (4 L(H))` from a precomputed `L(H)`.
pub fn delta0_from_l(l: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::DegeneratePrior(l));
    }
    Ok(delta / (4.0 * l))
}

/// Indifference gap `Δ₀ = δ / (4 L(H))`.
pub fn delta0(prior: &Prior, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    delta0_from_l(l_total(prior)?, delta)
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// Estimate of `p / scale` from `hits` successes in `n` Bernoulli trials.
    fn from_hits(hits: u64, n: u64, scale: f64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            value: p / scale,
            std_error: (p * (1.0 - p) / n as f64).sqrt() / scale,
        }
    }

    pub fn contains_within(&self, lo: f64, hi: f64, sigmas: f64) -> bool {
        self.value >= lo - sigmas * self.std_error && self.value <= hi + sigmas * self.std_error
    }
}

/// Monte Carlo estimates of the small-gap volumes for one gap width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub gap: f64,
    pub n_samples: u64,
    pub k: usize,
    /// `L(H, Δ) = P[μ_i* − μ_j* ≤ Δ] / Δ`.
    pub total: McEstimate,
    /// `L_ij(H, Δ) = P[μ ∈ Θ_ij, μ_i − μ_j ≤ Δ] / Δ`, row-major k×k.
    pub pairs: Vec<McEstimate>,
    /// `L'_ij(H, Δ)`: as `pairs` with the extra restriction
    /// `|μ_i|, |μ_j| ≤ 1/√Δ`.
    pub pairs_truncated: Vec<McEstimate>,
}

impl VolumeEstimate {
    pub fn pair(&self, i: usize, j: usize) -> McEstimate {
        self.pairs[i * self.k + j]
    }

    pub fn pair_truncated(&self, i: usize, j: usize) -> McEstimate {
        self.pairs_truncated[i * self.k + j]
    }
}

/// Draws `n_samples` models and estimates the small-gap volumes at `gap`.
pub fn volume_estimate(prior: &Prior, gap: f64, n_samples: u64, rng: &mut Stream) -> Result<VolumeEstimate> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::invalid("delta_gap", format!("must be positive, got {gap}")));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let k = prior.k();
    let radius = 1.0 / gap.sqrt();
    let mut total = 0u64;
    let mut pairs = vec![0u64; k * k];
    let mut truncated = vec![0u64; k * k];
    let mut mu = vec![0.0; k];
    for _ in 0..n_samples {
        for (x, a) in mu.iter_mut().zip(prior.arms()) {
            *x = rng.normal(a.m, a.xi);
        }
        let (i, j) = best_and_second(&mu);
        if mu[i] - mu[j] <= gap {
            total += 1;
            pairs[i * k + j] += 1;
            if mu[i].abs() <= radius && mu[j].abs() <= radius {
                truncated[i * k + j] += 1;
            }
        }
    }
    let est = |h: u64| McEstimate::from_hits(h, n_samples, gap);
    Ok(VolumeEstimate {
        gap,
        n_samples,
        k,
        total: est(total),
        pairs: pairs.into_iter().map(est).collect(),
        pairs_truncated: truncated.into_iter().map(est).collect(),
    })
}

/// Monte Carlo estimate of `L(H, Δ) = P[μ_i* − μ_j* ≤ Δ] / Δ`.
pub fn l_delta(prior: &Prior, gap: f64, n_samples: u64, rng: &mut Stream) -> Result<McEstimate> {
    Ok(volume_estimate(prior, gap, n_samples, rng)?.total)
}

/// Which small-gap volume bound to test against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeBand {
    /// `L_ij(H,Δ) ∈ [L_ij − Δ/ξ_i, L_ij + Δ/ξ_i]`.
    Plain,
    /// `L'_ij(H,Δ) ∈ [L_ij − 2Δ/ξ_i, L_ij + Δ/ξ_i]`.
    Truncated,
}

/// Interval the pair volume must fall in for gap `gap`.
pub fn volume_band(prior: &Prior, l_ij: f64, i: usize, gap: f64, band: VolumeBand) -> (f64, f64) {
    let slack = gap / prior.arms()[i].xi;
    match band {
        VolumeBand::Plain => (l_ij - slack, l_ij + slack),
        VolumeBand::Truncated => (l_ij - 2.0 * slack, l_ij + slack),
    }
}

/// Alternative indifference gap: the largest `Δ` with
/// `P[μ_i* − μ_j* ≤ Δ] ≤ δ/2`, i.e. the δ/2 quantile of the top-two gap,
/// estimated from `n_samples` model draws. Useful when δ is too large for
/// `δ / (4 L(H))` to be meaningful.
pub fn delta0_gap_quantile(prior: &Prior, delta: f64, n_samples: u64, rng: &mut Stream) -> Result<f64> {
    check_delta(delta)?;
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let mut gaps: Vec<f64> = (0..n_samples)
        .map(|_| {
            let model = sample_model(prior, rng);
            model.gap()
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    // Largest Δ whose empirical cdf stays at or below δ/2.
    let allowed = (0.5 * delta * n_samples as f64).floor() as usize;
    if allowed >= gaps.len() {
        return Ok(gaps[gaps.len() - 1]);
    }
    if allowed == 0 {
        return Ok(gaps[0] * 0.5);
    }
    Ok(0.5 * (gaps[allowed - 1] + gaps[allowed]))
}
