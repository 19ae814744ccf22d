use bayesbai_core::prior::{
    delta0, hardness, l_delta, l_ij, l_total, prob_best, sample_model, volume_estimate, ArmPrior, Prior,
};
use bayesbai_core::rng::Stream;
use bayesbai_core::Error;
use proptest::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Composite Simpson over `[a, b]` with `n` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Independent `L_ij` built on statrs' normal distribution.
fn oracle_l_ij(arms: &[(f64, f64)], i: usize, j: usize) -> f64 {
    let dists: Vec<Normal> = arms.iter().map(|&(m, xi)| Normal::new(m, xi).unwrap()).collect();
    let lo = arms.iter().map(|&(m, xi)| m - 12.0 * xi).fold(f64::MAX, f64::min);
    let hi = arms.iter().map(|&(m, xi)| m + 12.0 * xi).fold(f64::MIN, f64::max);
    let f = |x: f64| {
        let mut v = dists[i].pdf(x) * dists[j].pdf(x);
        for (s, d) in dists.iter().enumerate() {
            if s != i && s != j {
                v *= d.cdf(x);
            }
        }
        v
    };
    simpson(f, lo, hi, 200_000)
}

fn prior_of(arms: &[(f64, f64)]) -> Prior {
    Prior::new(arms.iter().map(|&(m, xi)| ArmPrior::new(m, xi, 1.0).unwrap()).collect()).unwrap()
}

#[test]
fn pdf_cdf_examples() {
    let a = ArmPrior::standard();
    assert!((a.pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    assert!((a.pdf(1.0) - 0.241_970_724_519_143_37).abs() < 1e-15);
    let b = ArmPrior::new(1.0, 2.0, 1.0).unwrap();
    assert!((b.pdf(3.0) - 0.120_985_362_259_571_68).abs() < 1e-15);
    assert!((a.cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
    let c = ArmPrior::new(5.0, 2.0, 1.0).unwrap();
    assert!(c.cdf(-20.0) < 1e-10);
    assert!(c.cdf(-20.0) >= 0.0);
}

#[test]
fn cdf_matches_statrs() {
    let a = ArmPrior::new(-0.7, 1.3, 1.0).unwrap();
    let n = Normal::new(-0.7, 1.3).unwrap();
    // statrs' erfc is accurate to ~1e-10 relative in the tails.
    for i in -80..=80 {
        let x = i as f64 / 10.0;
        assert!((a.cdf(x) - n.cdf(x)).abs() <= 1e-9 * n.cdf(x), "{x}");
        assert!((a.pdf(x) - n.pdf(x)).abs() <= 1e-12 * n.pdf(x), "{x}");
    }
    // High-precision reference for Φ(−4.7/1.3).
    assert!((a.cdf(-5.4) - 1.499_510_156_432_558e-4).abs() < 1e-18);
}

#[test]
fn invalid_arms_rejected() {
    assert!(ArmPrior::new(0.0, 0.0, 1.0).is_err());
    assert!(ArmPrior::new(0.0, 1.0, -1.0).is_err());
    assert!(ArmPrior::new(f64::NAN, 1.0, 1.0).is_err());
    assert!(Prior::new(vec![ArmPrior::standard()]).is_err());
}

#[test]
fn sampled_moments() {
    let prior = prior_of(&[(0.0, 1.0), (2.0, 0.5)]);
    let mut rng = Stream::from_seed(17);
    let n = 100_000;
    let (mut s, mut s2) = ([0.0; 2], [0.0; 2]);
    for _ in 0..n {
        let m = sample_model(&prior, &mut rng);
        for i in 0..2 {
            s[i] += m.mu()[i];
            s2[i] += m.mu()[i] * m.mu()[i];
        }
    }
    for (i, (m, xi)) in [(0.0, 1.0), (2.0, 0.5)].into_iter().enumerate() {
        let mean = s[i] / n as f64;
        let sd = (s2[i] / n as f64 - mean * mean).sqrt();
        assert!((mean - m).abs() < 0.02, "arm {i} mean {mean}");
        assert!((sd - xi).abs() < 0.02, "arm {i} sd {sd}");
    }
}

#[test]
fn tiny_prior_sd_pins_the_mean() {
    let prior = prior_of(&[(0.3, 1e-12), (0.0, 1.0)]);
    let m = sample_model(&prior, &mut Stream::from_seed(1));
    assert!((m.mu()[0] - 0.3).abs() < 1e-10);
}

#[test]
fn sampling_replays() {
    let prior = Prior::standard(4).unwrap();
    let a = sample_model(&prior, &mut Stream::from_seed(9));
    let b = sample_model(&prior, &mut Stream::from_seed(9));
    assert_eq!(a, b);
}

#[test]
fn standard_two_and_three_arms() {
    let l2 = l_total(&Prior::standard(2).unwrap()).unwrap();
    assert!((l2 - 1.0 / SQRT_PI).abs() < 1e-9, "{l2}");
    let l3 = l_total(&Prior::standard(3).unwrap()).unwrap();
    assert!((l3 - 1.5 / SQRT_PI).abs() < 1e-9, "{l3}");
}

#[test]
fn standard_ten_arms() {
    let h = hardness(&Prior::standard(10).unwrap()).unwrap();
    assert!((h.total - 1.538_752_730_835_17).abs() < 1e-6, "{}", h.total);
    let oracle = oracle_l_ij(&[(0.0, 1.0); 10], 0, 1) * 90.0;
    assert!((h.total - oracle).abs() < 1e-6, "{} vs {oracle}", h.total);
}

#[test]
fn heterogeneous_prior_matches_oracle() {
    let arms = [(0.0, 1.0), (1.0, 0.5), (-0.5, 2.0), (0.2, 0.1)];
    let prior = prior_of(&arms);
    let h = hardness(&prior).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                let o = oracle_l_ij(&arms, i, j);
                assert!((h.pair(i, j) - o).abs() < 1e-7, "({i},{j}) {} vs {o}", h.pair(i, j));
            }
        }
    }
}

#[test]
fn pair_symmetry_is_exact() {
    let prior = prior_of(&[(0.0, 1.0), (1.0, 0.5), (-0.5, 2.0)]);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert_eq!(
                    l_ij(&prior, i, j).unwrap().to_bits(),
                    l_ij(&prior, j, i).unwrap().to_bits()
                );
            }
        }
    }
    assert!(matches!(l_ij(&prior, 1, 1), Err(Error::SamePair { .. })));
    assert!(matches!(l_ij(&prior, 0, 3), Err(Error::ArmOutOfRange { .. })));
}

#[test]
fn separated_priors_are_easy() {
    let prior = prior_of(&[(0.0, 0.01), (10.0, 0.01)]);
    let l = l_total(&prior).unwrap();
    assert!(l < 1e-11, "{l}");
    assert!(l >= 0.0);
}

#[test]
fn exchangeable_pairs_are_equal() {
    let h = hardness(&Prior::standard(5).unwrap()).unwrap();
    let first = h.pair(0, 1);
    for i in 0..5 {
        for j in 0..5 {
            if i != j {
                assert!((h.pair(i, j) - first).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn indifference_gap() {
    let d = delta0(&Prior::standard(2).unwrap(), 0.1).unwrap();
    assert!((d - 0.044_311_346_272_637_9).abs() < 1e-10, "{d}");
    let d10 = delta0(&Prior::standard(10).unwrap(), 0.01).unwrap();
    assert!((d10 - 0.001_624_692_486_260_025).abs() < 1e-9, "{d10}");
    let separated = prior_of(&[(0.0, 1e-3), (1e3, 1e-3)]);
    assert!(matches!(delta0(&separated, 0.1), Err(Error::DegeneratePrior(_))));
    assert!(delta0(&Prior::standard(2).unwrap(), 1.5).is_err());
}

#[test]
fn small_gap_volume_near_hardness() {
    let prior = Prior::standard(2).unwrap();
    let est = l_delta(&prior, 0.01, 1_000_000, &mut Stream::from_seed(5)).unwrap();
    let l = 1.0 / SQRT_PI;
    assert!(est.contains_within(l - 0.01, l + 0.01, 3.0), "{est:?}");
}

#[test]
fn large_gap_volume_is_small() {
    let prior = Prior::standard(2).unwrap();
    let est = l_delta(&prior, 10.0, 100_000, &mut Stream::from_seed(6)).unwrap();
    assert!(est.value <= 0.1, "{est:?}");
}

#[test]
fn volume_pairs_sum_to_total() {
    let prior = Prior::standard(3).unwrap();
    let v = volume_estimate(&prior, 0.1, 20_000, &mut Stream::from_seed(8)).unwrap();
    let sum: f64 = v.pairs.iter().map(|p| p.value).sum();
    assert!((sum - v.total.value).abs() < 1e-12);
    for (p, t) in v.pairs.iter().zip(&v.pairs_truncated) {
        assert!(t.value <= p.value);
    }
}

#[test]
fn prob_best_sums_to_one_and_matches_sampling() {
    let prior = prior_of(&[(0.0, 1.0), (0.5, 0.5), (-1.0, 2.0)]);
    let p: Vec<f64> = (0..3).map(|i| prob_best(&prior, i).unwrap()).collect();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let mut rng = Stream::from_seed(12);
    let n = 200_000;
    let mut wins = [0u64; 3];
    for _ in 0..n {
        wins[sample_model(&prior, &mut rng).best()] += 1;
    }
    for i in 0..3 {
        let freq = wins[i] as f64 / n as f64;
        let se = (p[i] * (1.0 - p[i]) / n as f64).sqrt();
        assert!((freq - p[i]).abs() < 4.0 * se, "arm {i}: {freq} vs {}", p[i]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone(m in -5.0f64..5.0, xi in 0.01f64..5.0, a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let arm = ArmPrior::new(m, xi, 1.0).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(arm.cdf(lo) <= arm.cdf(hi));
        prop_assert!((0.0..=1.0).contains(&arm.cdf(lo)));
    }

    #[test]
    fn hardness_is_shift_invariant(c in -10.0f64..10.0, m1 in -1.0f64..1.0, xi1 in 0.3f64..2.0) {
        let base = prior_of(&[(0.0, 1.0), (m1, xi1)]);
        let moved = prior_of(&[(c, 1.0), (m1 + c, xi1)]);
        let (a, b) = (l_total(&base).unwrap(), l_total(&moved).unwrap());
        prop_assert!((a - b).abs() < 1e-8 * a.max(1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn hardness_scales_inversely(s in 0.1f64..10.0) {
        // Scaling every prior sd by s scales L by 1/s.
        let a = l_total(&prior_of(&[(0.0, 1.0), (0.5, 0.7), (-0.3, 1.4)])).unwrap();
        let b = l_total(&prior_of(&[(0.0, s), (0.5 * s, 0.7 * s), (-0.3 * s, 1.4 * s)])).unwrap();
        prop_assert!((a - s * b).abs() < 1e-8 * a);
    }
}
