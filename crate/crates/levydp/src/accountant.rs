//! Privacy accounting for noisy SGD releases.
//!
//! Given the noise mix, problem size, and a time horizon, the accountant
//! produces a Renyi guarantee by instantiating the envelope inequality of
//! [`crate::privacy_core`] with the drive and contraction implied by the
//! dynamics. Two modes exist: the multifractal bound applies whenever a
//! Gaussian component is present, and the pure-jump bound applies when the
//! noise is purely alpha-stable.

use crate::constants::{k_alpha_d, Dimension, StableIndex};
use crate::error::{Error, Result};
use crate::privacy_core::{
    optimize_beta, rdp_to_eps_delta, rdp_to_zero_delta, solve_envelope, EnvelopeParams,
    RdpGuarantee, Regime, RenyiOrder,
};

/// Scales of the driving noise: an alpha-stable part and a Gaussian part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub alpha: StableIndex,
    pub sigma_alpha: f64,
    pub sigma_2: f64,
}

impl NoiseSpec {
    /// Validates both scales nonnegative, finite, and not both zero.
    pub fn new(alpha: StableIndex, sigma_alpha: f64, sigma_2: f64) -> Result<Self> {
        for (name, s) in [("sigma_alpha", sigma_alpha), ("sigma_2", sigma_2)] {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and nonnegative, got {s}"
                )));
            }
        }
        if sigma_alpha == 0.0 && sigma_2 == 0.0 {
            return Err(Error::Domain(
                "at least one noise scale must be positive".into(),
            ));
        }
        Ok(NoiseSpec {
            alpha,
            sigma_alpha,
            sigma_2,
        })
    }

    /// True when a Gaussian component is present.
    pub fn has_gaussian(&self) -> bool {
        self.sigma_2 > 0.0
    }
}

/// Time horizon of a release: a continuous duration or a step count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HorizonSpec {
    /// Total elapsed time `t >= 0`.
    ContinuousTime(f64),
    /// `steps` iterations of step size `step_size > 0`.
    DiscreteSteps { steps: u64, step_size: f64 },
}

impl HorizonSpec {
    /// Validates a continuous horizon.
    pub fn continuous(t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!(
                "horizon must be finite and nonnegative, got {t}"
            )));
        }
        Ok(HorizonSpec::ContinuousTime(t))
    }

    /// Validates a discrete horizon.
    pub fn discrete(steps: u64, step_size: f64) -> Result<Self> {
        if !step_size.is_finite() || step_size <= 0.0 {
            return Err(Error::Domain(format!(
                "step size must be finite and positive, got {step_size}"
            )));
        }
        Ok(HorizonSpec::DiscreteSteps { steps, step_size })
    }

    /// Elapsed time of the horizon; `steps * step_size` in the discrete case.
    pub fn effective_time(&self) -> f64 {
        match *self {
            HorizonSpec::ContinuousTime(t) => t,
            HorizonSpec::DiscreteSteps { steps, step_size } => steps as f64 * step_size,
        }
    }
}

/// Inputs of an accounting query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccountingParams {
    /// Dataset size.
    pub n: u64,
    /// Parameter dimension.
    pub d: Dimension,
    /// Renyi order, at least 2.
    pub beta: RenyiOrder,
    /// Gradient sensitivity bound between neighboring datasets.
    pub sensitivity: f64,
    /// Poincare-constant scale of the stationary family.
    pub gamma: f64,
    /// Truncation radius entering the pure-jump constant.
    pub r_radius: f64,
    /// Noise scales.
    pub noise: NoiseSpec,
    initial_divergence: f64,
}

impl AccountingParams {
    /// Validates an accounting query.
    ///
    /// Requires `n >= 1`, sensitivity finite and nonnegative, `gamma` and
    /// `r_radius` finite and positive, order at least 2, and a stability
    /// index above 1 (the accounting theory covers indices in (1, 2)).
    pub fn new(
        n: u64,
        d: Dimension,
        beta: RenyiOrder,
        sensitivity: f64,
        gamma: f64,
        r_radius: f64,
        noise: NoiseSpec,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dataset size must be at least 1".into()));
        }
        beta.require_at_least_two()?;
        if !sensitivity.is_finite() || sensitivity < 0.0 {
            return Err(Error::Domain(format!(
                "sensitivity must be finite and nonnegative, got {sensitivity}"
            )));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::Domain(format!(
                "gamma must be finite and positive, got {gamma}"
            )));
        }
        if !r_radius.is_finite() || r_radius <= 0.0 {
            return Err(Error::Domain(format!(
                "r_radius must be finite and positive, got {r_radius}"
            )));
        }
        if noise.alpha.get() <= 1.0 {
            return Err(Error::Domain(format!(
                "accounting requires a stability index in (1, 2), got {}",
                noise.alpha.get()
            )));
        }
        Ok(AccountingParams {
            n,
            d,
            beta,
            sensitivity,
            gamma,
            r_radius,
            noise,
            initial_divergence: 0.0,
        })
    }

    /// Expert override: start the envelope from a positive divergence.
    ///
    /// The default of 0 models identical initial laws; a positive value
    /// routes through the decaying envelope branch. No optimality claim is
    /// attached to this path.
    pub fn with_initial_divergence(mut self, f0: f64) -> Result<Self> {
        if !f0.is_finite() || f0 < 0.0 {
            return Err(Error::Domain(format!(
                "initial divergence must be finite and nonnegative, got {f0}"
            )));
        }
        self.initial_divergence = f0;
        Ok(self)
    }

    /// Initial divergence the envelope starts from.
    pub fn initial_divergence(&self) -> f64 {
        self.initial_divergence
    }

    /// Same query at a different Renyi order.
    pub fn at_order(&self, beta: RenyiOrder) -> Result<Self> {
        beta.require_at_least_two()?;
        let mut p = *self;
        p.beta = beta;
        Ok(p)
    }
}

/// Renyi bound when a Gaussian component is present.
///
/// Drive `K_n = beta S^2 / (2 sigma_2^2 n^2)`, contraction
/// `a = 1 / (gamma beta)`; the envelope of those parameters is evaluated at
/// the horizon's effective time. Requires `sigma_2 > 0`.
pub fn multifractal_bound(p: &AccountingParams, h: &HorizonSpec) -> Result<RdpGuarantee> {
    if p.noise.sigma_2 == 0.0 {
        return Err(Error::Domain(
            "multifractal bound requires a Gaussian component (sigma_2 > 0)".into(),
        ));
    }
    let beta = p.beta.get();
    let s2 = p.noise.sigma_2;
    let n2 = (p.n as f64) * (p.n as f64);
    let drive = beta * p.sensitivity * p.sensitivity / (2.0 * s2 * s2 * n2);
    let contraction = 1.0 / (p.gamma * beta);
    let env = solve_envelope(
        &EnvelopeParams::new(drive, contraction, p.initial_divergence)?,
        h.effective_time(),
    )?;
    RdpGuarantee::new(p.beta, env.value, env.regime)
}

/// Renyi bound for purely alpha-stable noise.
///
/// Drive `K_n = K_{alpha,d} (beta - 1) S^2 / (sigma_alpha^alpha n^2)` with
/// the truncation constant at radius `r_radius`, contraction
/// `a = 1 / (2 gamma (beta - 1))`. Requires `sigma_2 = 0` and
/// `sigma_alpha > 0`; the guarantee is conditional on the supplied radius.
pub fn pure_jump_bound(p: &AccountingParams, h: &HorizonSpec) -> Result<RdpGuarantee> {
    if p.noise.sigma_2 != 0.0 {
        return Err(Error::Domain(
            "pure-jump bound requires sigma_2 = 0; use the multifractal bound instead".into(),
        ));
    }
    if p.noise.sigma_alpha <= 0.0 {
        return Err(Error::Domain(
            "pure-jump bound requires sigma_alpha > 0".into(),
        ));
    }
    let beta = p.beta.get();
    let alpha = p.noise.alpha;
    let k_const = k_alpha_d(alpha, p.d, p.r_radius)?;
    let n2 = (p.n as f64) * (p.n as f64);
    let drive = k_const * (beta - 1.0) * p.sensitivity * p.sensitivity
        / (p.noise.sigma_alpha.powf(alpha.get()) * n2);
    let contraction = 1.0 / (2.0 * p.gamma * (beta - 1.0));
    let env = solve_envelope(
        &EnvelopeParams::new(drive, contraction, p.initial_divergence)?,
        h.effective_time(),
    )?;
    RdpGuarantee::new(p.beta, env.value, env.regime)
}

/// Bound dispatched on the noise mode: multifractal when a Gaussian
/// component is present, pure-jump otherwise.
pub fn mode_bound(p: &AccountingParams, h: &HorizonSpec) -> Result<RdpGuarantee> {
    if p.noise.has_gaussian() {
        multifractal_bound(p, h)
    } else {
        pure_jump_bound(p, h)
    }
}

/// `(0, delta)` report for the mode-dispatched bound.
pub fn zero_delta_report(p: &AccountingParams, h: &HorizonSpec) -> Result<f64> {
    Ok(rdp_to_zero_delta(&mode_bound(p, h)?))
}

/// Parameter axis swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Stability index of the noise.
    Alpha,
    /// Parameter dimension.
    Dim,
    /// Dataset size.
    N,
    /// Renyi order.
    Beta,
    /// Scale of the mode-active noise component (`sigma_2` when a Gaussian
    /// part is present, `sigma_alpha` otherwise).
    Sigma,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::Dim => "d",
            SweepAxis::N => "n",
            SweepAxis::Beta => "beta",
            SweepAxis::Sigma => "sigma",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepAxis::Alpha),
            "d" | "dim" => Ok(SweepAxis::Dim),
            "n" => Ok(SweepAxis::N),
            "beta" => Ok(SweepAxis::Beta),
            "sigma" => Ok(SweepAxis::Sigma),
            other => Err(Error::Config(format!(
                "unknown sweep axis '{other}' (expected alpha, d, n, beta, sigma)"
            ))),
        }
    }
}

/// One resolved point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub beta: f64,
    pub kappa: f64,
    pub regime: Regime,
    pub epsilon: f64,
    pub zero_delta: f64,
}

/// One sweep row: the axis value plus either a resolved point or the
/// reason the configuration was invalid. Invalid rows are kept, not
/// dropped, so a sweep table always has one row per requested value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub outcome: std::result::Result<SweepPoint, String>,
}

fn integer_axis_value(value: f64, name: &str) -> Result<u64> {
    if !value.is_finite() || value < 1.0 || value.fract() != 0.0 || value > u64::MAX as f64 {
        return Err(Error::Domain(format!(
            "{name} sweep values must be positive integers, got {value}"
        )));
    }
    Ok(value as u64)
}

fn sweep_point(
    base: &AccountingParams,
    h: &HorizonSpec,
    axis: SweepAxis,
    value: f64,
    delta: f64,
    beta_grid: Option<&[f64]>,
) -> Result<SweepPoint> {
    let mut p = *base;
    match axis {
        SweepAxis::Alpha => {
            let alpha = StableIndex::new(value)?;
            p.noise = NoiseSpec::new(alpha, p.noise.sigma_alpha, p.noise.sigma_2)?;
            if alpha.get() <= 1.0 {
                return Err(Error::Domain(format!(
                    "accounting requires a stability index in (1, 2), got {value}"
                )));
            }
        }
        SweepAxis::Dim => {
            let d = integer_axis_value(value, "dimension")?;
            if d > u32::MAX as u64 {
                return Err(Error::Domain(format!("dimension {value} is too large")));
            }
            p.d = Dimension::new(d as u32)?;
        }
        SweepAxis::N => {
            p.n = integer_axis_value(value, "dataset size")?;
        }
        SweepAxis::Beta => {
            p.beta = RenyiOrder::new(value)?.require_at_least_two()?;
        }
        SweepAxis::Sigma => {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Domain(format!(
                    "sigma sweep values must be positive, got {value}"
                )));
            }
            p.noise = if p.noise.has_gaussian() {
                NoiseSpec::new(p.noise.alpha, p.noise.sigma_alpha, value)?
            } else {
                NoiseSpec::new(p.noise.alpha, value, 0.0)?
            };
        }
    }
    let optimize_over = match (axis, beta_grid) {
        (SweepAxis::Beta, _) | (_, None) => None,
        (_, Some(grid)) => Some(grid),
    };
    let (beta, epsilon, bound) = match optimize_over {
        Some(grid) => {
            let (best, eps) = optimize_beta(
                |order| Ok(mode_bound(&p.at_order(order)?, h)?.kappa),
                grid,
                delta,
            )?;
            let bound = mode_bound(&p.at_order(best)?, h)?;
            (best.get(), eps, bound)
        }
        None => {
            let bound = mode_bound(&p, h)?;
            let eps = rdp_to_eps_delta(&bound, delta)?;
            (p.beta.get(), eps, bound)
        }
    };
    Ok(SweepPoint {
        beta,
        kappa: bound.kappa,
        regime: bound.regime,
        epsilon,
        zero_delta: rdp_to_zero_delta(&bound),
    })
}

/// Evaluates the mode-dispatched bound along one parameter axis.
///
/// Each row converts to epsilon at the supplied `delta`. When `beta_grid`
/// is given and the axis is not the order itself, every row reports the
/// grid order minimizing epsilon. Rows whose configuration is invalid
/// carry the error text instead of a point.
pub fn sweep(
    base: &AccountingParams,
    h: &HorizonSpec,
    axis: SweepAxis,
    values: &[f64],
    delta: f64,
    beta_grid: Option<&[f64]>,
) -> Vec<SweepRow> {
    values
        .iter()
        .map(|&value| SweepRow {
            axis_value: value,
            outcome: sweep_point(base, h, axis, value, delta, beta_grid)
                .map_err(|e| e.to_string()),
        })
        .collect()
}
