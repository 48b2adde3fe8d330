//! Coupled-simulation runs driven from the flat configuration.
//!
//! The command-line data model is scalar-mean estimation: `problem.n`
//! points at the origin of dimension `problem.d`, with the neighboring
//! dataset moving the last point to `simulate.data_gap` along the first
//! coordinate. Checkpoint clouds always go to `checkpoints.csv`; a
//! single-trajectory run additionally writes the full coupled trace to
//! `trajectory.csv`. Overflow-truncated runs record the truncation step
//! in the manifest and exit with the runtime-error code.

use crate::accountant::NoiseSpec;
use crate::cli::account::{write_manifest, write_outputs};
use crate::cli::config::RunConfig;
use crate::constants::StableIndex;
use crate::error::{Error, Result};
use crate::simulator::{
    run_ensemble, run_pair, Dataset, InitialState, LossSpec, NeighborPair, SimConfig,
};
use crate::stable_noise::RngSeed;

struct ResolvedSim {
    pair: NeighborPair,
    sim: SimConfig,
    trajectories: usize,
    checkpoints: Vec<usize>,
    seed: RngSeed,
}

fn resolve_simulation(cfg: &mut RunConfig) -> Result<ResolvedSim> {
    cfg.set_default("problem.d", "1")?;
    cfg.set_default("simulate.data_gap", "0")?;
    cfg.set_default("simulate.trajectories", "1")?;
    let n = cfg.require_u64("problem.n")? as usize;
    let d = cfg.require_u64("problem.d")? as usize;
    let steps = cfg.require_u64("simulate.steps")? as usize;
    let eta = cfg.require_f64("simulate.eta")?;
    let seed = RngSeed(cfg.require_u64("simulate.seed")?);
    let trajectories = cfg.require_u64("simulate.trajectories")? as usize;
    let gap = cfg.require_f64("simulate.data_gap")?;

    cfg.set_default("simulate.batch", &n.to_string())?;
    let batch = cfg.require_u64("simulate.batch")? as usize;
    if batch > n {
        return Err(Error::Config(format!(
            "simulate.batch = {batch} exceeds the dataset size problem.n = {n}"
        )));
    }
    cfg.set_default("simulate.checkpoints", &steps.to_string())?;
    let checkpoints: Vec<usize> = cfg
        .require_u64_list("simulate.checkpoints")?
        .into_iter()
        .map(|c| c as usize)
        .collect();
    if let Some(&bad) = checkpoints.iter().find(|&&c| c > steps) {
        return Err(Error::Config(format!(
            "simulate.checkpoints contains {bad}, beyond simulate.steps = {steps}"
        )));
    }

    cfg.set_default("noise.sigma_alpha", "0")?;
    cfg.set_default("noise.sigma2", "0")?;
    cfg.set_default("noise.alpha", "1.5")?;
    let sigma_alpha = cfg.require_f64("noise.sigma_alpha")?;
    let sigma2 = cfg.require_f64("noise.sigma2")?;
    let noise = if sigma_alpha == 0.0 && sigma2 == 0.0 {
        None
    } else {
        Some(NoiseSpec::new(
            StableIndex::new(cfg.require_f64("noise.alpha")?)?,
            sigma_alpha,
            sigma2,
        )?)
    };

    let init = if cfg.contains("simulate.init_point") {
        if cfg.contains("simulate.init_scale") {
            return Err(Error::Config(
                "simulate.init_point and simulate.init_scale are mutually exclusive".into(),
            ));
        }
        let point = cfg.require_f64_list("simulate.init_point")?;
        if point.len() != d {
            return Err(Error::Config(format!(
                "simulate.init_point has {} coordinates, problem.d = {d}",
                point.len()
            )));
        }
        InitialState::Point(point)
    } else {
        cfg.set_default("simulate.init_scale", "1")?;
        InitialState::GaussianScale(cfg.require_f64("simulate.init_scale")?)
    };

    let base = vec![vec![0.0; d]; n];
    let mut moved = base.clone();
    moved[n - 1][0] = gap;
    let pair = NeighborPair::new(Dataset::new(base, None)?, Dataset::new(moved, None)?, n - 1)?;

    let sim = SimConfig {
        loss: LossSpec::Quadratic,
        noise,
        step_size: eta,
        steps,
        batch_size: batch,
        projection_radius: cfg.get_f64("simulate.projection")?,
        init,
    };
    Ok(ResolvedSim { pair, sim, trajectories, checkpoints, seed })
}

/// Runs the configured ensemble and writes checkpoint clouds, plus the
/// full coupled trace when there is exactly one trajectory.
pub fn cmd_simulate(cfg: &mut RunConfig) -> Result<i32> {
    let resolved = resolve_simulation(cfg)?;

    let mut trace_csv = None;
    if resolved.trajectories == 1 {
        let trace = run_pair(&resolved.pair, &resolved.sim, resolved.seed.split(0))?;
        if let Some(truncation) = &trace.truncation {
            let extras = vec![(
                "result.truncated_at_step".to_string(),
                truncation.step.to_string(),
            )];
            write_outputs(cfg, "trajectory.csv", &trajectory_text(&trace)?, &extras)?;
            eprintln!(
                "simulation overflowed at step {}: state magnitude {:e}",
                truncation.step, truncation.magnitude
            );
            return Ok(3);
        }
        trace_csv = Some(trajectory_text(&trace)?);
    }

    let clouds = match run_ensemble(
        &resolved.pair,
        &resolved.sim,
        resolved.trajectories,
        &resolved.checkpoints,
        resolved.seed,
    ) {
        Ok(clouds) => clouds,
        Err(Error::Overflow { step, magnitude }) => {
            let extras =
                vec![("result.truncated_at_step".to_string(), step.to_string())];
            write_manifest(cfg, &extras)?;
            eprintln!("simulation overflowed at step {step}: state magnitude {magnitude:e}");
            return Ok(3);
        }
        Err(e) => return Err(e),
    };

    let mut cloud_csv = Vec::new();
    clouds.write_csv(&mut cloud_csv)?;
    let cloud_text = String::from_utf8(cloud_csv).expect("CSV output is UTF-8");
    let dir = write_outputs(cfg, "checkpoints.csv", &cloud_text, &[])?;
    if let Some(text) = trace_csv {
        std::fs::write(dir.join("trajectory.csv"), text)?;
    }
    println!(
        "wrote {} checkpoint clouds of {} trajectories to {}",
        resolved.checkpoints.len(),
        resolved.trajectories,
        dir.display()
    );
    Ok(0)
}

fn trajectory_text(trace: &crate::simulator::TrajectoryPair) -> Result<String> {
    let mut out = Vec::new();
    trace.write_csv(&mut out)?;
    Ok(String::from_utf8(out).expect("CSV output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim_config(dir: &std::path::Path) -> RunConfig {
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("problem.n", "4"),
            ("simulate.steps", "20"),
            ("simulate.eta", "0.1"),
            ("simulate.seed", "9"),
            ("simulate.trajectories", "3"),
            ("simulate.checkpoints", "10,20"),
            ("noise.sigma2", "1"),
            ("simulate.data_gap", "1"),
        ] {
            cfg.set(k, v).unwrap();
        }
        cfg.set("output.dir", dir.to_str().unwrap()).unwrap();
        cfg
    }

    #[test]
    fn ensemble_run_writes_clouds_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = sim_config(dir.path());
        assert_eq!(cmd_simulate(&mut cfg).unwrap(), 0);
        let clouds = std::fs::read_to_string(dir.path().join("checkpoints.csv")).unwrap();
        assert!(clouds.starts_with("trajectory_id,step,which,w_1\r\n"));
        // 2 checkpoints x 3 trajectories x both sides, plus the header.
        assert_eq!(clouds.lines().count(), 1 + 2 * 3 * 2);
        let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("simulate.seed = 9"));
        assert!(manifest.contains("simulate.batch = 4"));
        assert!(!dir.path().join("trajectory.csv").exists());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        cmd_simulate(&mut sim_config(dir_a.path())).unwrap();
        cmd_simulate(&mut sim_config(dir_b.path())).unwrap();
        let a = std::fs::read(dir_a.path().join("checkpoints.csv")).unwrap();
        let b = std::fs::read(dir_b.path().join("checkpoints.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_trajectory_runs_also_write_the_trace() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = sim_config(dir.path());
        cfg.set("simulate.trajectories", "1").unwrap();
        cmd_simulate(&mut cfg).unwrap();
        let trace = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        assert!(trace.starts_with("step,which,w_1\r\n"));
        // Step 0 plus 20 steps, each with both sides, plus the header.
        assert_eq!(trace.lines().count(), 1 + 21 * 2);
    }

    #[test]
    fn overflow_is_reported_in_the_manifest_with_exit_three() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = sim_config(dir.path());
        cfg.set("simulate.eta", "1e200").unwrap();
        cfg.set("simulate.trajectories", "2").unwrap();
        assert_eq!(cmd_simulate(&mut cfg).unwrap(), 3);
        let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("result.truncated_at_step = 1"), "{manifest}");
    }

    #[test]
    fn config_conflicts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = sim_config(dir.path());
        cfg.set("simulate.batch", "9").unwrap();
        assert!(matches!(cmd_simulate(&mut cfg), Err(Error::Config(_))));

        let mut cfg = sim_config(dir.path());
        cfg.set("simulate.checkpoints", "10,21").unwrap();
        assert!(matches!(cmd_simulate(&mut cfg), Err(Error::Config(_))));

        let mut cfg = sim_config(dir.path());
        cfg.set("simulate.init_point", "0.5").unwrap();
        cfg.set("simulate.init_scale", "1").unwrap();
        assert!(matches!(cmd_simulate(&mut cfg), Err(Error::Config(_))));
    }
}
