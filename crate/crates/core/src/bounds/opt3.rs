//! Desk-scale check that spreading a pull budget evenly over the near-tie
//! region minimizes the relaxed lower-bound objective.
//!
//! The region `{|μ₁ − μ₂| < Δ}` (with `Δ = 8δ / L(H)`, clipped to six prior
//! standard deviations) is cut into cells of prior mass `w_c`. An allocation
//! assigns `n_c ≥ 0` pulls to each cell subject to `Σ w_c n_c = N`. The
//! objective is `Σ w_c exp(−r n_c)` with the worst-case rate
//! `r = Δ² / (2 min σ²)`; by convexity the uniform allocation `n_c = N / Σ w`
//! is optimal, and this check pits it against random feasible allocations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::{l_total, Prior};
use crate::rng::Stream;

/// Half-width of the clipping box, in prior standard deviations.
const BOX_SDS: f64 = 6.0;

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_27,
    0.222_381_034_453_374_48,
    0.101_228_536_290_376_26,
];

/// Cell layout over the band: `along` slices of the diagonal direction,
/// each split into `across` strips of the gap direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opt3Grid {
    pub along: usize,
    pub across: usize,
}

impl Opt3Grid {
    /// `cells` slices along the diagonal, one strip across.
    pub fn with_cells(cells: usize) -> Self {
        Self {
            along: cells,
            across: 1,
        }
    }

    pub fn cells(&self) -> usize {
        self.along * self.across
    }
}

impl Default for Opt3Grid {
    fn default() -> Self {
        Self::with_cells(40)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Opt3Report {
    pub gap: f64,
    pub rate: f64,
    pub budget: f64,
    pub cells: usize,
    pub region_mass: f64,
    pub uniform_value: f64,
    pub best_sampled: f64,
    pub worst_sampled: f64,
    pub samples: usize,
    /// Sampled allocations that beat the uniform one.
    pub violations: usize,
    pub passed: bool,
}

/// 8-point Gauss–Legendre on `[a, b]`.
fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        sum += w * (f(c - h * x) + f(c + h * x));
    }
    sum * h
}

/// Prior mass of each cell, in diagonal-major order.
fn cell_masses(prior: &Prior, gap: f64, grid: Opt3Grid) -> Result<Vec<f64>> {
    let [a1, a2] = prior.arms() else {
        return Err(Error::invalid("prior", "the allocation check needs exactly 2 arms"));
    };
    // Centre s = (μ₁ + μ₂)/2 and difference g = μ₁ − μ₂; the Jacobian is 1.
    let lo = (a1.m - BOX_SDS * a1.xi).max(a2.m - BOX_SDS * a2.xi) + 0.5 * gap;
    let hi = (a1.m + BOX_SDS * a1.xi).min(a2.m + BOX_SDS * a2.xi) - 0.5 * gap;
    if !(hi > lo) {
        return Err(Error::invalid(
            "gap",
            format!("band of width {gap} does not fit the prior box"),
        ));
    }
    let ds = (hi - lo) / grid.along as f64;
    let dg = 2.0 * gap / grid.across as f64;
    let mut masses = Vec::with_capacity(grid.cells());
    for i in 0..grid.along {
        let (s0, s1) = (lo + ds * i as f64, lo + ds * (i + 1) as f64);
        for j in 0..grid.across {
            let (g0, g1) = (-gap + dg * j as f64, -gap + dg * (j + 1) as f64);
            let mass = gauss_legendre(
                |s| gauss_legendre(|g| a1.pdf(s + 0.5 * g) * a2.pdf(s - 0.5 * g), g0, g1),
                s0,
                s1,
            );
            masses.push(mass);
        }
    }
    Ok(masses)
}

fn objective(masses: &[f64], alloc: &[f64], rate: f64) -> f64 {
    masses.iter().zip(alloc).map(|(w, n)| w * (-rate * n).exp()).sum()
}

/// Compares the uniform allocation of `budget` against `trials` random
/// feasible allocations on a two-arm prior.
pub fn verify_opt3(
    prior: &Prior,
    delta: f64,
    budget: f64,
    grid: Opt3Grid,
    trials: usize,
    rng: &mut Stream,
) -> Result<Opt3Report> {
    crate::prior::check_delta(delta)?;
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::invalid(
            "budget",
            format!("must be finite and non-negative, got {budget}"),
        ));
    }
    if grid.cells() == 0 {
        return Err(Error::invalid("grid", "need at least one cell"));
    }
    if prior.k() != 2 {
        return Err(Error::invalid("prior", "the allocation check needs exactly 2 arms"));
    }
    let gap = 8.0 * delta / l_total(prior)?;
    let masses = cell_masses(prior, gap, grid)?;
    let region_mass: f64 = masses.iter().sum();
    let rate = gap * gap / (2.0 * prior.min_sigma().powi(2));

    let uniform = vec![budget / region_mass; masses.len()];
    let uniform_value = objective(&masses, &uniform, rate);

    let mut best_sampled = f64::INFINITY;
    let mut worst_sampled = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut alloc = vec![0.0; masses.len()];
    for _ in 0..trials {
        for n in alloc.iter_mut() {
            *n = rng.exponential();
        }
        let spent: f64 = masses.iter().zip(&alloc).map(|(w, n)| w * n).sum();
        for n in alloc.iter_mut() {
            *n *= budget / spent;
        }
        let value = objective(&masses, &alloc, rate);
        best_sampled = best_sampled.min(value);
        worst_sampled = worst_sampled.max(value);
        if value < uniform_value {
            violations += 1;
        }
    }
    Ok(Opt3Report {
        gap,
        rate,
        budget,
        cells: masses.len(),
        region_mass,
        uniform_value,
        best_sampled,
        worst_sampled,
        samples: trials,
        violations,
        passed: violations == 0,
    })
}
