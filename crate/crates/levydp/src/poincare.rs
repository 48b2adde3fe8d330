//! Poincare constants of noise laws and their evolution under SGD maps.
//!
//! A law carries a pair of constants: `frac` scales the fractional
//! Dirichlet form and `gauss` the classical gradient form. Closure
//! operations (convolution, bi-Lipschitz pushforward, bounded density
//! perturbation) transform the pair, and [`track_sgd`] composes one
//! pushforward and one convolution per SGD step to follow the fractional
//! constant of the iterate law on a strongly convex problem.

use crate::constants::{Dimension, StableIndex};
use crate::error::{Error, Result};

/// Poincare constants `(frac, gauss)` of a probability law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareConstants {
    /// Coefficient of the fractional Dirichlet form.
    pub frac: f64,
    /// Coefficient of the classical gradient form.
    pub gauss: f64,
}

impl PoincareConstants {
    /// Validates both coefficients finite and nonnegative.
    pub fn new(frac: f64, gauss: f64) -> Result<Self> {
        for (name, v) in [("frac", frac), ("gauss", gauss)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "Poincare constant {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(PoincareConstants { frac, gauss })
    }
}

/// Constants of the sum of two independent variables: componentwise sum.
pub fn convolve(c1: &PoincareConstants, c2: &PoincareConstants) -> PoincareConstants {
    PoincareConstants {
        frac: c1.frac + c2.frac,
        gauss: c1.gauss + c2.gauss,
    }
}

/// Constants after pushing forward through a bi-Lipschitz map with
/// expansion bounds `0 < l1 <= l2`:
/// `(frac * l2^(alpha+d) / l1^d, gauss * l2^2)`.
pub fn pushforward_bilipschitz(
    c: &PoincareConstants,
    l1: f64,
    l2: f64,
    alpha: StableIndex,
    d: Dimension,
) -> Result<PoincareConstants> {
    if !l1.is_finite() || !l2.is_finite() || l1 <= 0.0 || l1 > l2 {
        return Err(Error::Domain(format!(
            "bi-Lipschitz bounds must satisfy 0 < l1 <= l2, got l1={l1}, l2={l2}"
        )));
    }
    let a = alpha.get();
    let dd = d.as_f64();
    let frac_multiplier = ((a + dd) * l2.ln() - dd * l1.ln()).exp();
    PoincareConstants::new(c.frac * frac_multiplier, c.gauss * l2 * l2)
}

/// Constants after a bounded log-density perturbation of size `b >= 0`:
/// both components scale by `exp(2 b)`.
pub fn perturb_bounded(c: &PoincareConstants, b: f64) -> Result<PoincareConstants> {
    if !b.is_finite() || b < 0.0 {
        return Err(Error::Domain(format!(
            "perturbation bound must be finite and nonnegative, got {b}"
        )));
    }
    let m = (2.0 * b).exp();
    PoincareConstants::new(c.frac * m, c.gauss * m)
}

/// A strongly convex, smooth problem driven by alpha-stable noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexProblem {
    /// Strong-convexity modulus, `0 < lambda <= smoothness`.
    pub lambda: f64,
    /// Smoothness modulus.
    pub smoothness: f64,
    /// Step size, `0 < eta < 1/smoothness`.
    pub eta: f64,
    /// Noise scale, `sigma >= 0`.
    pub sigma: f64,
    /// Stability index of the noise.
    pub alpha: StableIndex,
    /// Parameter dimension.
    pub d: Dimension,
}

impl ConvexProblem {
    /// Validates moduli, step size, and noise scale.
    pub fn new(
        lambda: f64,
        smoothness: f64,
        eta: f64,
        sigma: f64,
        alpha: StableIndex,
        d: Dimension,
    ) -> Result<Self> {
        if !lambda.is_finite() || !smoothness.is_finite() || lambda <= 0.0 || lambda > smoothness {
            return Err(Error::Domain(format!(
                "moduli must satisfy 0 < lambda <= smoothness, got lambda={lambda}, smoothness={smoothness}"
            )));
        }
        if !eta.is_finite() || eta <= 0.0 || eta >= 1.0 / smoothness {
            return Err(Error::Domain(format!(
                "step size must lie in (0, 1/smoothness), got {eta}"
            )));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Domain(format!(
                "noise scale must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(ConvexProblem {
            lambda,
            smoothness,
            eta,
            sigma,
            alpha,
            d,
        })
    }

    /// Left-hand side of the admissibility condition,
    /// `(lambda / smoothness) (1 + alpha / d)`; tracking requires it
    /// to exceed 1.
    pub fn condition_lhs(&self) -> f64 {
        (self.lambda / self.smoothness) * (1.0 + self.alpha.get() / self.d.as_f64())
    }

    /// Step size minimizing the per-step contraction factor,
    /// `((alpha + d) lambda - d smoothness) / (alpha lambda smoothness)`.
    ///
    /// Errors when the admissibility condition fails; the message carries
    /// the evaluated left-hand side.
    pub fn optimal_step(&self) -> Result<f64> {
        let lhs = self.condition_lhs();
        if lhs <= 1.0 {
            return Err(Error::Domain(format!(
                "admissibility condition violated: (lambda/smoothness)(1 + alpha/d) = {lhs} <= 1"
            )));
        }
        let a = self.alpha.get();
        let dd = self.d.as_f64();
        Ok(((a + dd) * self.lambda - dd * self.smoothness) / (a * self.lambda * self.smoothness))
    }
}

/// Which power the contraction factor's denominator carries.
///
/// The per-step factor is `(1 - eta lambda)^(alpha + d)` divided by
/// `(1 - eta smoothness)` raised to either the dimension (the default,
/// matching the pushforward-plus-convolution composition) or the tail
/// index (a strictly smaller factor, selectable for comparison).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContractionExponent {
    #[default]
    Dimension,
    TailIndex,
}

/// Per-step contraction factor `F(eta)` of the fractional constant.
///
/// Requires `0 < eta <= 1/lambda`; values of `eta` at or above
/// `1/smoothness` are rejected unless the factor degenerates to zero
/// (`eta = 1/lambda = 1/smoothness`).
pub fn contraction_factor(
    problem: &ConvexProblem,
    eta: f64,
    exponent: ContractionExponent,
) -> Result<f64> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::Domain(format!(
            "step size must be positive and finite, got {eta}"
        )));
    }
    let num = 1.0 - eta * problem.lambda;
    let den = 1.0 - eta * problem.smoothness;
    if num < 0.0 {
        return Err(Error::Domain(format!(
            "step size {eta} exceeds 1/lambda"
        )));
    }
    if num == 0.0 {
        return Ok(0.0);
    }
    if den <= 0.0 {
        return Err(Error::Domain(format!(
            "step size {eta} is not below 1/smoothness"
        )));
    }
    let a = problem.alpha.get();
    let dd = problem.d.as_f64();
    let ratio = num / den;
    Ok(match exponent {
        ContractionExponent::Dimension => num.powf(a) * ratio.powf(dd),
        ContractionExponent::TailIndex => num.powf(dd) * ratio.powf(a),
    })
}

/// Result of tracking the fractional constant through SGD steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedConstants {
    /// Whether the admissibility condition holds.
    pub admissible: bool,
    /// Evaluated left-hand side of the condition.
    pub condition_lhs: f64,
    /// Constants after the requested number of steps (the input constants
    /// unchanged when inadmissible: no tracking claim is made then).
    pub constants: PoincareConstants,
    /// Invariant level `eta sigma^alpha / (1 - F(optimal step))`; `None`
    /// when inadmissible.
    pub c0: Option<f64>,
    /// The factor-minimizing step size; `None` when inadmissible.
    pub optimal_step: Option<f64>,
}

/// Tracks the fractional Poincare constant through `k` SGD steps.
///
/// Each step pushes the constants through the gradient map (bi-Lipschitz
/// with bounds `1 - eta smoothness <= 1 - eta lambda`) and convolves with
/// the noise increment `(eta sigma^alpha, 0)`, so the fractional
/// component follows `c <- F(eta) c + eta sigma^alpha` with the
/// dimension-exponent factor. Starting constants are `(gamma0, 0)`.
/// When `gamma0 <= c0` and the step size equals the optimal step, the
/// iterates stay at or below `c0`; for other step sizes with
/// `F(eta) < 1` they converge geometrically to
/// `eta sigma^alpha / (1 - F(eta))`.
pub fn track_sgd(problem: &ConvexProblem, gamma0: f64, k: usize) -> Result<TrackedConstants> {
    track_sgd_with(problem, gamma0, k, ContractionExponent::Dimension)
}

/// [`track_sgd`] with an explicit choice of contraction exponent.
///
/// The tail-index variant multiplies by the smaller factor directly; the
/// dimension variant composes the closure operations step by step.
pub fn track_sgd_with(
    problem: &ConvexProblem,
    gamma0: f64,
    k: usize,
    exponent: ContractionExponent,
) -> Result<TrackedConstants> {
    if !gamma0.is_finite() || gamma0 < 0.0 {
        return Err(Error::Domain(format!(
            "initial constant must be finite and nonnegative, got {gamma0}"
        )));
    }
    let condition_lhs = problem.condition_lhs();
    if condition_lhs <= 1.0 {
        return Ok(TrackedConstants {
            admissible: false,
            condition_lhs,
            constants: PoincareConstants::new(gamma0, 0.0)?,
            c0: None,
            optimal_step: None,
        });
    }
    let eta0 = problem.optimal_step()?;
    let f_opt = contraction_factor(problem, eta0, exponent)?;
    let increment = problem.eta * problem.sigma.powf(problem.alpha.get());
    let c0 = increment / (1.0 - f_opt);
    let l1 = 1.0 - problem.eta * problem.smoothness;
    let l2 = 1.0 - problem.eta * problem.lambda;
    let f_eta = contraction_factor(problem, problem.eta, exponent)?;
    let noise = PoincareConstants::new(increment, 0.0)?;
    let mut constants = PoincareConstants::new(gamma0, 0.0)?;
    for _ in 0..k {
        constants = match exponent {
            ContractionExponent::Dimension => convolve(
                &pushforward_bilipschitz(&constants, l1, l2, problem.alpha, problem.d)?,
                &noise,
            ),
            ContractionExponent::TailIndex => PoincareConstants::new(
                f_eta * constants.frac + increment,
                constants.gauss,
            )?,
        };
    }
    Ok(TrackedConstants {
        admissible: true,
        condition_lhs,
        constants,
        c0: Some(c0),
        optimal_step: Some(eta0),
    })
}
