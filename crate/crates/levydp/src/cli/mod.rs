//! Command-line front end.
//!
//! Four subcommands expose the library: `account` evaluates the
//! divergence bound once, `sweep` tabulates it along one axis,
//! `simulate` integrates coupled trajectory pairs, and `verify` reruns
//! the numerical check suites. Every flag mirrors one configuration
//! key; flags override file values, and each run echoes its fully
//! resolved configuration into the output directory as `manifest.txt`.

pub mod account;
pub mod config;
pub mod simulate;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "levydp", version, about = "Privacy accounting under heavy-tailed noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the divergence bound for one parameter set.
    Account(AccountArgs),
    /// Tabulate the bound along one swept axis.
    Sweep(SweepArgs),
    /// Integrate coupled trajectory pairs and write checkpoint clouds.
    Simulate(SimulateArgs),
    /// Rerun a named numerical verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSVs and the manifest (key output.dir).
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ProblemArgs {
    /// Dataset size (key problem.n).
    #[arg(long, value_name = "N")]
    n: Option<String>,
    /// Ambient dimension (key problem.d).
    #[arg(long, value_name = "D")]
    d: Option<String>,
    /// Gradient sensitivity (key problem.sg).
    #[arg(long, value_name = "S")]
    sg: Option<String>,
    /// Poincare-scale parameter (key problem.gamma).
    #[arg(long, value_name = "G")]
    gamma: Option<String>,
    /// Poincare radius (key problem.r).
    #[arg(long, value_name = "R")]
    r: Option<String>,
    /// Stability index of the jump noise (key noise.alpha).
    #[arg(long, value_name = "A")]
    alpha: Option<String>,
    /// Scale of the jump noise (key noise.sigma_alpha).
    #[arg(long, value_name = "S")]
    sigma_alpha: Option<String>,
    /// Scale of the Gaussian noise (key noise.sigma2).
    #[arg(long, value_name = "S")]
    sigma2: Option<String>,
}

impl ProblemArgs {
    fn pairs(&self) -> [(&'static str, Option<&String>); 8] {
        [
            ("problem.n", self.n.as_ref()),
            ("problem.d", self.d.as_ref()),
            ("problem.sg", self.sg.as_ref()),
            ("problem.gamma", self.gamma.as_ref()),
            ("problem.r", self.r.as_ref()),
            ("noise.alpha", self.alpha.as_ref()),
            ("noise.sigma_alpha", self.sigma_alpha.as_ref()),
            ("noise.sigma2", self.sigma2.as_ref()),
        ]
    }
}

#[derive(Args, Debug, Default)]
struct AccountingArgs {
    /// Noise regime, multifractal or pure-jump (key accounting.mode).
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    /// Horizon setting, continuous or discrete (key accounting.setting).
    #[arg(long, value_name = "SETTING")]
    setting: Option<String>,
    /// Renyi order of the bound (key accounting.beta).
    #[arg(long, value_name = "B")]
    beta: Option<String>,
    /// Continuous horizon (key accounting.t).
    #[arg(long, value_name = "T")]
    t: Option<String>,
    /// Discrete step count (key accounting.steps).
    #[arg(long, value_name = "K")]
    steps: Option<String>,
    /// Discrete step size (key accounting.eta).
    #[arg(long, value_name = "H")]
    eta: Option<String>,
    /// Target delta for the epsilon conversion (key accounting.delta).
    #[arg(long, value_name = "DELTA")]
    delta: Option<String>,
}

impl AccountingArgs {
    fn pairs(&self) -> [(&'static str, Option<&String>); 7] {
        [
            ("accounting.mode", self.mode.as_ref()),
            ("accounting.setting", self.setting.as_ref()),
            ("accounting.beta", self.beta.as_ref()),
            ("accounting.t", self.t.as_ref()),
            ("accounting.steps", self.steps.as_ref()),
            ("accounting.eta", self.eta.as_ref()),
            ("accounting.delta", self.delta.as_ref()),
        ]
    }
}

#[derive(Args, Debug, Default)]
struct AccountArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    accounting: AccountingArgs,
}

impl AccountArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = base_config(&self.common)?;
        apply(&mut cfg, &self.problem.pairs())?;
        apply(&mut cfg, &self.accounting.pairs())?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    #[command(flatten)]
    account: AccountArgs,
    /// Swept parameter, one of alpha, d, n, beta, sigma (key accounting.axis).
    #[arg(long, value_name = "AXIS")]
    axis: Option<String>,
    /// Comma-separated axis values (key accounting.values).
    #[arg(long, value_name = "LIST")]
    values: Option<String>,
    /// Renyi orders to optimize over per value (key accounting.beta_grid).
    #[arg(long, value_name = "LIST")]
    beta_grid: Option<String>,
}

impl SweepArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = self.account.build()?;
        apply(
            &mut cfg,
            &[
                ("accounting.axis", self.axis.as_ref()),
                ("accounting.values", self.values.as_ref()),
                ("accounting.beta_grid", self.beta_grid.as_ref()),
            ],
        )?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Default)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Step size of the recursion (key simulate.eta).
    #[arg(long, value_name = "H")]
    eta: Option<String>,
    /// Number of steps (key simulate.steps).
    #[arg(long, value_name = "K")]
    steps: Option<String>,
    /// Minibatch size (key simulate.batch).
    #[arg(long, value_name = "B")]
    batch: Option<String>,
    /// Ensemble size (key simulate.trajectories).
    #[arg(long, value_name = "M")]
    trajectories: Option<String>,
    /// Steps at which clouds are recorded (key simulate.checkpoints).
    #[arg(long, value_name = "LIST")]
    checkpoints: Option<String>,
    /// Value of the single differing data point (key simulate.data_gap).
    #[arg(long, value_name = "GAP")]
    data_gap: Option<String>,
    /// Scale of the Gaussian initial state (key simulate.init_scale).
    #[arg(long, value_name = "S")]
    init_scale: Option<String>,
    /// Deterministic initial state (key simulate.init_point).
    #[arg(long, value_name = "LIST")]
    init_point: Option<String>,
    /// Projection radius for the iterates (key simulate.projection).
    #[arg(long, value_name = "R")]
    projection: Option<String>,
    /// Master seed of the ensemble (key simulate.seed).
    #[arg(long, value_name = "SEED")]
    seed: Option<String>,
}

impl SimulateArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = base_config(&self.common)?;
        apply(&mut cfg, &self.problem.pairs())?;
        apply(
            &mut cfg,
            &[
                ("simulate.eta", self.eta.as_ref()),
                ("simulate.steps", self.steps.as_ref()),
                ("simulate.batch", self.batch.as_ref()),
                ("simulate.trajectories", self.trajectories.as_ref()),
                ("simulate.checkpoints", self.checkpoints.as_ref()),
                ("simulate.data_gap", self.data_gap.as_ref()),
                ("simulate.init_scale", self.init_scale.as_ref()),
                ("simulate.init_point", self.init_point.as_ref()),
                ("simulate.projection", self.projection.as_ref()),
                ("simulate.seed", self.seed.as_ref()),
            ],
        )?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Default)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Suite to run: bregman, bbm, sampler, poincare, renyi, flow, or
    /// all (key verify.suite).
    #[arg(long, value_name = "SUITE")]
    suite: Option<String>,
    /// Seed shared by every check in the suite (key verify.seed).
    #[arg(long, value_name = "SEED")]
    seed: Option<String>,
}

impl VerifyArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = base_config(&self.common)?;
        apply(
            &mut cfg,
            &[
                ("verify.suite", self.suite.as_ref()),
                ("verify.seed", self.seed.as_ref()),
            ],
        )?;
        Ok(cfg)
    }
}

fn base_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.set("output.dir", out)?;
    }
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, pairs: &[(&'static str, Option<&String>)]) -> Result<()> {
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(())
}

fn init_thread_pool() -> std::result::Result<(), i32> {
    let raw = match std::env::var("LEVYDP_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => {
            eprintln!("config error: LEVYDP_THREADS must be valid unicode");
            return Err(2);
        }
        Ok(raw) => raw,
    };
    match raw.trim().parse::<usize>() {
        Ok(threads) if threads >= 1 => {
            // A second initialization in the same process keeps the
            // first pool.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            Ok(())
        }
        _ => {
            eprintln!("config error: LEVYDP_THREADS must be a positive integer, got '{raw}'");
            Err(2)
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Account(args) => account::cmd_account(&mut args.build()?),
        Command::Sweep(args) => account::cmd_sweep(&mut args.build()?),
        Command::Simulate(args) => simulate::cmd_simulate(&mut args.build()?),
        Command::Verify(args) => verify::cmd_verify(&mut args.build()?),
    }
}

/// Parses the given arguments, runs the subcommand, and returns the
/// process exit code: 0 on success, 1 on verification failure, 2 on
/// configuration errors, 3 on runtime errors.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    if let Err(code) = init_thread_pool() {
        return code;
    }
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            match err {
                Error::Config(_) => 2,
                _ => 3,
            }
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_from_args(std::env::args_os())
}
