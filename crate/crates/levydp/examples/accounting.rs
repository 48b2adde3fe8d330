//! Minimal accounting query: one bound, one conversion.

use levydp::accountant::{mode_bound, AccountingParams, HorizonSpec, NoiseSpec};
use levydp::constants::{Dimension, StableIndex};
use levydp::privacy_core::{rdp_to_eps_delta, RenyiOrder};

fn main() -> levydp::Result<()> {
    let noise = NoiseSpec::new(StableIndex::new(1.5)?, 0.0, 1.0)?;
    let params = AccountingParams::new(
        10_000,
        Dimension::new(10)?,
        RenyiOrder::new(2.0)?,
        1.0, // gradient sensitivity
        1.0, // Poincare ratio
        1.0, // truncation radius
        noise,
    )?;
    let bound = mode_bound(&params, &HorizonSpec::continuous(100.0)?)?;
    let epsilon = rdp_to_eps_delta(&bound, 1e-5)?;
    println!(
        "kappa = {:.3e} ({}), epsilon(1e-5) = {:.4}",
        bound.kappa, bound.regime, epsilon
    );
    Ok(())
}
