use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Principal branch `W₀(y)` of the Lambert W function (`w eʷ = y`, `w ≥ −1`),
/// by Halley iteration from a branch-point series or logarithmic start.
pub fn lambert_w0(y: f64) -> Result<f64> {
    if y.is_nan() || y < -INV_E {
        return Err(Error::invalid("y", format!("W0 is defined for y >= -1/e, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = initial_guess(y);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - y;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            // Sitting exactly on the branch point.
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 1e-15 * next.abs().max(1e-300);
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(y: f64) -> f64 {
    if y < -0.25 {
        // Series about the branch point y = −1/e.
        let p = (2.0 * (std::f64::consts::E * y + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if y < 3.0 {
        let l = (1.0 + y).ln();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = y.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(-0.1).unwrap() + 0.111_832_559_158_962_97).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_784).abs() < 1e-15);
        assert!((lambert_w0(10.0).unwrap() - 1.745_528_002_740_699_4).abs() < 1e-14);
        assert!((lambert_w0(-INV_E).unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(lambert_w0(-0.5).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn residual_on_grid() {
        let lo = -INV_E + 1e-6;
        let n = 20_000;
        for i in 0..=n {
            let y = lo + (10.0 - lo) * i as f64 / n as f64;
            let w = lambert_w0(y).unwrap();
            assert!(w >= -1.0);
            let residual = (w * w.exp() - y).abs();
            assert!(residual <= 1e-12 * y.abs().max(1.0), "y={y} w={w} residual={residual}");
        }
    }

    #[test]
    fn large_arguments() {
        for y in [1e3, 1e10, 1e100, 1e300] {
            let w = lambert_w0(y).unwrap();
            assert!(((w + w.ln()) - y.ln()).abs() < 1e-12 * y.ln(), "{y}");
        }
    }
}
