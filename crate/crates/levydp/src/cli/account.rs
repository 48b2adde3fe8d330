//! Accounting queries: single-point reports and parameter sweeps.

use std::path::PathBuf;

use crate::accountant::{
    mode_bound, sweep, AccountingParams, HorizonSpec, NoiseSpec, SweepAxis, SweepRow,
};
use crate::cli::config::RunConfig;
use crate::constants::{Dimension, StableIndex};
use crate::csvio::{fmt_f64, write_record};
use crate::error::{Error, Result};
use crate::privacy_core::{rdp_to_eps_delta, rdp_to_zero_delta, RenyiOrder};

/// Columns of the single-point accounting report.
pub const ACCOUNT_HEADER: [&str; 5] = ["beta", "kappa", "regime", "epsilon_at_delta", "zero_delta"];

/// Columns of the sweep report; invalid rows leave the numeric columns
/// empty and carry the reason in `error`.
pub const SWEEP_HEADER: [&str; 8] =
    ["axis", "value", "beta", "kappa", "regime", "epsilon_at_delta", "zero_delta", "error"];

/// Builds accounting parameters, horizon, and target delta from the
/// resolved configuration, filling defaults into the manifest.
pub fn resolve_accounting(cfg: &mut RunConfig) -> Result<(AccountingParams, HorizonSpec, f64)> {
    cfg.set_default("problem.d", "1")?;
    let mode = cfg.require("accounting.mode")?.to_string();
    let setting = cfg.require("accounting.setting")?.to_string();
    let beta = RenyiOrder::new(cfg.require_f64("accounting.beta")?)?;
    let n = cfg.require_u64("problem.n")?;
    let d_raw = cfg.require_u64("problem.d")?;
    let d = Dimension::new(
        u32::try_from(d_raw)
            .map_err(|_| Error::Config(format!("key 'problem.d' is too large: {d_raw}")))?,
    )?;
    let sg = cfg.require_f64("problem.sg")?;
    let gamma = cfg.require_f64("problem.gamma")?;
    let delta = cfg.require_f64("accounting.delta")?;

    let noise = match mode.as_str() {
        "multifractal" => {
            let sigma2 = cfg.require_f64("noise.sigma2")?;
            if sigma2 == 0.0 {
                return Err(Error::Config(
                    "multifractal mode requires noise.sigma2 > 0".into(),
                ));
            }
            cfg.set_default("noise.alpha", "1.5")?;
            cfg.set_default("noise.sigma_alpha", "0")?;
            cfg.set_default("problem.r", "1")?;
            NoiseSpec::new(
                StableIndex::new(cfg.require_f64("noise.alpha")?)?,
                cfg.require_f64("noise.sigma_alpha")?,
                sigma2,
            )?
        }
        "pure-jump" => {
            let sigma_alpha = cfg.require_f64("noise.sigma_alpha")?;
            if sigma_alpha == 0.0 {
                return Err(Error::Config(
                    "pure-jump mode requires noise.sigma_alpha > 0".into(),
                ));
            }
            cfg.set_default("noise.sigma2", "0")?;
            if cfg.require_f64("noise.sigma2")? != 0.0 {
                return Err(Error::Config(
                    "pure-jump mode requires noise.sigma2 = 0; use multifractal mode for mixed noise"
                        .into(),
                ));
            }
            cfg.require("problem.r")?;
            NoiseSpec::new(
                StableIndex::new(cfg.require_f64("noise.alpha")?)?,
                sigma_alpha,
                0.0,
            )?
        }
        other => unreachable!("mode '{other}' passed key validation"),
    };
    let r = cfg.require_f64("problem.r")?;

    let horizon = match setting.as_str() {
        "continuous" => HorizonSpec::continuous(cfg.require_f64("accounting.t")?)?,
        "discrete" => HorizonSpec::discrete(
            cfg.require_u64("accounting.steps")?,
            cfg.require_f64("accounting.eta")?,
        )?,
        other => unreachable!("setting '{other}' passed key validation"),
    };
    let params = AccountingParams::new(n, d, beta, sg, gamma, r, noise)?;
    Ok((params, horizon, delta))
}

/// Creates the output directory and writes the resolved manifest into
/// it, with any extra result lines appended.
pub fn write_manifest(
    cfg: &mut RunConfig,
    manifest_extra: &[(String, String)],
) -> Result<PathBuf> {
    cfg.set_default("output.dir", ".")?;
    let dir = PathBuf::from(cfg.require("output.dir")?);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("manifest.txt"), cfg.render_manifest(manifest_extra))?;
    Ok(dir)
}

/// Writes the manifest plus one CSV; returns the output directory.
pub fn write_outputs(
    cfg: &mut RunConfig,
    csv_name: &str,
    csv_text: &str,
    manifest_extra: &[(String, String)],
) -> Result<PathBuf> {
    let dir = write_manifest(cfg, manifest_extra)?;
    std::fs::write(dir.join(csv_name), csv_text)?;
    Ok(dir)
}

/// Evaluates the bound once and reports
/// `(beta, kappa, regime, epsilon_at_delta, zero_delta)`.
pub fn cmd_account(cfg: &mut RunConfig) -> Result<i32> {
    let (params, horizon, delta) = resolve_accounting(cfg)?;
    let bound = mode_bound(&params, &horizon)?;
    let epsilon = rdp_to_eps_delta(&bound, delta)?;
    let zero_delta = rdp_to_zero_delta(&bound);

    let mut csv = Vec::new();
    write_record(&mut csv, &ACCOUNT_HEADER)?;
    write_record(
        &mut csv,
        &[
            fmt_f64(bound.beta.get()),
            fmt_f64(bound.kappa),
            bound.regime.to_string(),
            fmt_f64(epsilon),
            fmt_f64(zero_delta),
        ],
    )?;
    let text = String::from_utf8(csv).expect("CSV output is UTF-8");
    write_outputs(cfg, "account.csv", &text, &[])?;
    print!("{text}");
    Ok(0)
}

fn sweep_csv(axis: SweepAxis, rows: &[SweepRow]) -> Result<String> {
    let mut csv = Vec::new();
    write_record(&mut csv, &SWEEP_HEADER)?;
    for row in rows {
        let record = match &row.outcome {
            Ok(point) => [
                axis.to_string(),
                fmt_f64(row.axis_value),
                fmt_f64(point.beta),
                fmt_f64(point.kappa),
                point.regime.to_string(),
                fmt_f64(point.epsilon),
                fmt_f64(point.zero_delta),
                String::new(),
            ],
            Err(reason) => [
                axis.to_string(),
                fmt_f64(row.axis_value),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                reason.clone(),
            ],
        };
        write_record(&mut csv, &record)?;
    }
    Ok(String::from_utf8(csv).expect("CSV output is UTF-8"))
}

/// Evaluates the bound along one axis and writes the long-format table.
pub fn cmd_sweep(cfg: &mut RunConfig) -> Result<i32> {
    let axis: SweepAxis = cfg.require("accounting.axis")?.parse()?;
    let values = cfg.require_f64_list("accounting.values")?;
    let beta_grid = cfg.get_f64_list("accounting.beta_grid")?;
    let (params, horizon, delta) = resolve_accounting(cfg)?;
    let rows = sweep(&params, &horizon, axis, &values, delta, beta_grid.as_deref());
    let text = sweep_csv(axis, &rows)?;
    write_outputs(cfg, "sweep.csv", &text, &[])?;
    print!("{text}");
    Ok(0)
}
