//! Renyi differential privacy for SGD driven by heavy-tailed noise.
//!
//! The library has three layers. The analytic layer turns noise and problem
//! parameters into divergence bounds: [`constants`] evaluates the fractional
//! Dirichlet-form constants, [`privacy_core`] solves the master envelope
//! inequality and converts Renyi guarantees to (eps, delta) form,
//! [`accountant`] assembles both into per-release privacy reports, and
//! [`poincare`] tracks Poincare constants through SGD-style maps. The
//! sampling layer ([`stable_noise`], [`simulator`]) draws isotropic
//! alpha-stable and Gaussian noise and runs coupled trajectory pairs on
//! neighboring datasets. The verification layer ([`divergence`]) estimates
//! Renyi divergences and Dirichlet forms from samples so the analytic bounds
//! can be checked empirically. [`cli`] wires everything into the `levydp`
//! binary.

pub mod accountant;
pub mod cli;
pub mod constants;
pub mod csvio;
pub mod divergence;
pub mod error;
pub mod numerics;
pub mod poincare;
pub mod privacy_core;
pub mod simulator;
pub mod stable_noise;

pub use error::{Error, Result};
