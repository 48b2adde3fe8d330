//! Envelope bounds for Renyi divergence growth and (eps, delta) conversions.
//!
//! The central object is the scalar differential inequality
//! `f'(t) <= K - a (1 - exp(-f(t)))` obeyed by the Renyi divergence between
//! coupled diffusions. [`solve_envelope`] returns the tightest closed-form
//! upper bound on `f(t)` implied by that inequality, together with the label
//! of the branch that produced it.

use crate::error::{Error, Result};

/// Renyi divergence order.
///
/// Orders above 1 are accepted; accounting paths additionally require
/// order at least 2 and enforce that via [`RenyiOrder::require_at_least_two`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    /// Validates `beta > 1`.
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 1.0 {
            return Err(Error::Domain(format!(
                "Renyi order must be a finite value above 1, got {beta}"
            )));
        }
        Ok(RenyiOrder(beta))
    }

    /// The validated order.
    pub fn get(self) -> f64 {
        self.0
    }

    /// Accounting bounds are only stated for orders >= 2.
    pub fn require_at_least_two(self) -> Result<Self> {
        if self.0 < 2.0 {
            return Err(Error::Domain(format!(
                "accounting requires Renyi order >= 2, got {}",
                self.0
            )));
        }
        Ok(self)
    }
}

/// Parameters of the envelope inequality `f' <= K - a (1 - exp(-f))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    /// Drive term `K >= 0`.
    pub drive: f64,
    /// Contraction rate `a > 0`.
    pub contraction: f64,
    /// Initial value `f(0) = f0 >= 0`.
    pub initial: f64,
}

impl EnvelopeParams {
    /// Validates `K >= 0`, `a > 0`, `f0 >= 0`, all finite.
    pub fn new(drive: f64, contraction: f64, initial: f64) -> Result<Self> {
        if !drive.is_finite() || drive < 0.0 {
            return Err(Error::Domain(format!(
                "envelope drive must be finite and nonnegative, got {drive}"
            )));
        }
        if !contraction.is_finite() || contraction <= 0.0 {
            return Err(Error::Domain(format!(
                "envelope contraction must be finite and positive, got {contraction}"
            )));
        }
        if !initial.is_finite() || initial < 0.0 {
            return Err(Error::Domain(format!(
                "envelope initial value must be finite and nonnegative, got {initial}"
            )));
        }
        Ok(EnvelopeParams {
            drive,
            contraction,
            initial,
        })
    }
}

/// Which envelope branch produced the reported bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// The linear-growth branch `f0 + K t`.
    Linear,
    /// The constant branch `log(a / (a - K))`, valid for all horizons.
    TimeUniform,
    /// The branch decaying from `f0` toward the constant level.
    Decaying,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Linear => write!(f, "linear"),
            Regime::TimeUniform => write!(f, "time-uniform"),
            Regime::Decaying => write!(f, "decaying"),
        }
    }
}

/// An envelope evaluation: the bound value and the branch that won.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBound {
    pub value: f64,
    pub regime: Regime,
}

/// A Renyi privacy guarantee: divergence at order `beta` is at most `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdpGuarantee {
    pub beta: RenyiOrder,
    pub kappa: f64,
    pub regime: Regime,
}

impl RdpGuarantee {
    /// Validates `kappa >= 0` and finite.
    pub fn new(beta: RenyiOrder, kappa: f64, regime: Regime) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::Domain(format!(
                "kappa must be finite and nonnegative, got {kappa}"
            )));
        }
        Ok(RdpGuarantee { beta, kappa, regime })
    }
}

/// `log(1 + exp(x))` without overflow for large `x`.
fn ln1p_exp(x: f64) -> f64 {
    if x > 36.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Tightest upper bound on `f(t)` under `f' <= K - a (1 - exp(-f))`,
/// `f(0) = f0`.
///
/// The linear branch `f0 + K t` always applies. When `K < a` the inequality
/// admits a stationary level `log(a / (a - K))`: initial values at or below
/// that level never leave it (constant branch), and initial values above it
/// decay toward it along
/// `log(a/(a-K)) + log(1 + exp(-(a-K) t) (exp(f0) (a-K)/a - 1))`,
/// which is the exact solution of the equality dynamics. The pointwise
/// minimum of the applicable branches is returned. `t` must be
/// nonnegative; the value at `t = 0` is exactly `f0`.
pub fn solve_envelope(params: &EnvelopeParams, t: f64) -> Result<EnvelopeBound> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!(
            "horizon must be finite and nonnegative, got {t}"
        )));
    }
    let (k, a, f0) = (params.drive, params.contraction, params.initial);
    let linear = f0 + k * t;
    if k >= a {
        return Ok(EnvelopeBound {
            value: linear,
            regime: Regime::Linear,
        });
    }
    let rate = a - k;
    let level = (a / rate).ln();
    if f0 <= level {
        // Constant branch; ties go to the time-uniform label since the
        // bound then holds for every horizon at once.
        if level <= linear {
            Ok(EnvelopeBound {
                value: level,
                regime: Regime::TimeUniform,
            })
        } else {
            Ok(EnvelopeBound {
                value: linear,
                regime: Regime::Linear,
            })
        }
    } else {
        // ln(exp(f0) rate / a - 1) evaluated in log space: the argument is
        // exp(c) - 1 with c = f0 + ln(rate/a) > 0.
        let c = f0 + (rate / a).ln();
        let ln_qm1 = c + (-((-c).exp())).ln_1p();
        let decaying = level + ln1p_exp(ln_qm1 - rate * t);
        if decaying < linear {
            Ok(EnvelopeBound {
                value: decaying,
                regime: Regime::Decaying,
            })
        } else {
            Ok(EnvelopeBound {
                value: linear,
                regime: Regime::Linear,
            })
        }
    }
}

/// Converts a Renyi guarantee to `(eps, delta)` differential privacy:
/// `eps = kappa + log(1/delta) / (beta - 1)` for `0 < delta <= 1`.
pub fn rdp_to_eps_delta(guarantee: &RdpGuarantee, delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 || delta > 1.0 {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    Ok(guarantee.kappa + (1.0 / delta).ln() / (guarantee.beta.get() - 1.0))
}

/// Converts a Renyi guarantee to `(0, delta)` differential privacy:
/// `delta = min(1, sqrt(kappa / 2))`.
pub fn rdp_to_zero_delta(guarantee: &RdpGuarantee) -> f64 {
    (guarantee.kappa / 2.0).sqrt().min(1.0)
}

/// Picks the grid order minimizing `kappa(beta) + log(1/delta) / (beta - 1)`.
///
/// `bound_at_beta` supplies the divergence bound per order; its errors
/// propagate. Every grid order must be at least 2 and the grid nonempty.
/// Ties break toward the smaller order.
pub fn optimize_beta<F>(
    mut bound_at_beta: F,
    beta_grid: &[f64],
    delta: f64,
) -> Result<(RenyiOrder, f64)>
where
    F: FnMut(RenyiOrder) -> Result<f64>,
{
    if beta_grid.is_empty() {
        return Err(Error::Domain("order grid must be nonempty".into()));
    }
    if !delta.is_finite() || delta <= 0.0 || delta > 1.0 {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let mut orders: Vec<f64> = Vec::with_capacity(beta_grid.len());
    for &b in beta_grid {
        RenyiOrder::new(b)?.require_at_least_two()?;
        orders.push(b);
    }
    orders.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut best: Option<(f64, f64)> = None;
    for b in orders {
        let order = RenyiOrder::new(b)?;
        let kappa = bound_at_beta(order)?;
        let eps = kappa + (1.0 / delta).ln() / (b - 1.0);
        match best {
            Some((_, best_eps)) if eps >= best_eps => {}
            _ => best = Some((b, eps)),
        }
    }
    let (b, eps) = best.unwrap();
    Ok((RenyiOrder::new(b)?, eps))
}
