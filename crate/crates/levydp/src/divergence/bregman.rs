//! Pointwise comparison of two Bregman divergences.

use crate::error::{Error, Result};

/// Difference between the Bregman divergence of `x^beta` at `(a, b)` and
/// the quadratic Bregman divergence of the half-power images,
///
/// ```text
/// (a^beta + (beta - 1) b^beta - beta a b^{beta - 1}) - (a^{beta/2} - b^{beta/2})^2
/// ```
///
/// which is nonnegative for all `a, b >= 0` and `beta >= 2`. Equal
/// arguments and `beta = 2` return exactly zero.
pub fn bregman_gap(a: f64, b: f64, beta: f64) -> Result<f64> {
    if !a.is_finite() || a < 0.0 || !b.is_finite() || b < 0.0 {
        return Err(Error::Domain(format!(
            "arguments must be finite and nonnegative, got a={a}, b={b}"
        )));
    }
    if !beta.is_finite() || beta < 2.0 {
        return Err(Error::Domain(format!("order must be at least 2, got {beta}")));
    }
    if a == b || beta == 2.0 {
        return Ok(0.0);
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    // Evaluates the exact rearrangement
    // 2 b^beta (((1 + u)^h - 1) - h u), u = (a - b) / b, h = beta / 2,
    // which avoids the catastrophic cancellation of the defining
    // formula near a = b.
    let h = 0.5 * beta;
    let u = (a - b) / b;
    Ok(2.0 * b.powf(beta) * ((h * u.ln_1p()).exp_m1() - h * u))
}
