//! End-to-end comparison of simulated divergence flows against the
//! accountant's envelope bounds.
//!
//! A coupled ensemble of noisy gradient descent runs on two neighboring
//! scalar-mean problems produces state clouds at chosen checkpoints.
//! The Renyi divergence between the clouds is estimated by histogram
//! and set against the accountant's bound for the matched sensitivity
//! and horizon. The estimate tracks the actual divergence of the two
//! laws while the bound dominates it, so every row should come out with
//! the estimate below the bound once Monte-Carlo noise is small.

use crate::accountant::{mode_bound, AccountingParams, HorizonSpec, NoiseSpec};
use crate::constants::{Dimension, StableIndex};
use crate::divergence::histogram::estimate_renyi;
use crate::error::{Error, Result};
use crate::privacy_core::RenyiOrder;
use crate::simulator::{
    pair_gradient_gap, run_ensemble, Dataset, InitialState, LossSpec, NeighborPair, SimConfig,
};
use crate::stable_noise::RngSeed;

/// Scenario for one flow comparison: scalar-mean estimation on datasets
/// of zeros, the neighbor replacing the last point by `data_gap`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCheckConfig {
    /// Dataset size.
    pub n: usize,
    /// Value of the single differing data point.
    pub data_gap: f64,
    pub step_size: f64,
    /// Steps at which the divergence is estimated.
    pub checkpoints: Vec<usize>,
    pub trajectories: usize,
    /// Renyi order of both the estimate and the bound.
    pub beta: f64,
    /// Gaussian noise scale of the dynamics.
    pub sigma_2: f64,
    /// Poincare-scale parameter passed to the accountant.
    pub gamma: f64,
    /// Histogram resolution; `None` picks the default for the sample count.
    pub bins: Option<usize>,
    pub seed: RngSeed,
}

/// One checkpoint of the comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRow {
    /// Elapsed continuous time, steps times step size.
    pub t: f64,
    /// Histogram estimate of the divergence between the clouds.
    pub kappa_hat: f64,
    /// Accountant bound at the same horizon.
    pub kappa_bound: f64,
}

/// Runs the coupled ensemble and compares estimated divergences with
/// the accountant bound at every checkpoint.
pub fn flow_check(config: &FlowCheckConfig) -> Result<Vec<FlowRow>> {
    if config.n == 0 {
        return Err(Error::Domain("dataset size must be at least 1".into()));
    }
    if !config.data_gap.is_finite() || config.data_gap < 0.0 {
        return Err(Error::Domain(format!(
            "data gap must be finite and nonnegative, got {}",
            config.data_gap
        )));
    }
    if config.trajectories < 2 {
        return Err(Error::Domain("divergence estimation needs at least 2 trajectories".into()));
    }
    if config.checkpoints.is_empty() {
        return Err(Error::Domain("need at least one checkpoint".into()));
    }
    let beta = RenyiOrder::new(config.beta)?;
    let loss = LossSpec::Quadratic;

    let base: Vec<Vec<f64>> = vec![vec![0.0]; config.n];
    let mut moved = base.clone();
    moved[config.n - 1] = vec![config.data_gap];
    let pair = NeighborPair::new(
        Dataset::new(base, None)?,
        Dataset::new(moved, None)?,
        config.n - 1,
    )?;
    let sensitivity = pair_gradient_gap(&loss, &[0.0], &[config.data_gap])?;

    let noise = NoiseSpec::new(StableIndex::new(1.5)?, 0.0, config.sigma_2)?;
    let steps = *config.checkpoints.iter().max().expect("checkpoints are nonempty");
    let sim = SimConfig {
        loss,
        noise: Some(noise),
        step_size: config.step_size,
        steps,
        batch_size: config.n,
        projection_radius: None,
        init: InitialState::GaussianScale(1.0),
    };
    let clouds =
        run_ensemble(&pair, &sim, config.trajectories, &config.checkpoints, config.seed)?;

    let params = AccountingParams::new(
        config.n as u64,
        Dimension::new(1)?,
        beta,
        sensitivity,
        config.gamma,
        1.0,
        noise,
    )?;

    clouds
        .clouds
        .iter()
        .map(|cloud| {
            let s: Vec<f64> = cloud.states_s.iter().map(|w| w[0]).collect();
            let s_prime: Vec<f64> = cloud.states_s_prime.iter().map(|w| w[0]).collect();
            let kappa_hat = estimate_renyi(&s_prime, &s, beta, config.bins)?;
            let t = cloud.step as f64 * config.step_size;
            let bound = mode_bound(&params, &HorizonSpec::continuous(t)?)?;
            Ok(FlowRow { t, kappa_hat, kappa_bound: bound.kappa })
        })
        .collect()
}
