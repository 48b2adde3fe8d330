//! Named verification suites behind the `verify` subcommand.
//!
//! Each suite reruns one family of numerical checks at a desk-scale
//! budget and emits one report row per check. Rows are deterministic
//! functions of the suite seed, so a failing report can be reproduced
//! from its manifest alone.

use rand::Rng;
use statrs::function::erf::erfc;

use crate::cli::account::write_outputs;
use crate::cli::config::RunConfig;
use crate::constants::{Dimension, StableIndex};
use crate::divergence::{
    bregman_gap, check_fractional_poincare, dirichlet_form, estimate_renyi, flow_check,
    gaussian_renyi, write_report, FlowCheckConfig, QuadConfig, ReportRow, TestFunction,
};
use crate::error::{Error, Result};
use crate::numerics::mean_and_se;
use crate::poincare::PoincareConstants;
use crate::privacy_core::RenyiOrder;
use crate::stable_noise::{
    sample_gaussian, sample_isotropic_stable, sample_positive_stable, RngSeed,
};

/// The individual suites, in the order `all` runs them.
pub const SUITE_NAMES: [&str; 6] = ["bregman", "bbm", "sampler", "poincare", "renyi", "flow"];

fn unit_uniform<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

fn suite_bregman(seed: RngSeed) -> Result<Vec<ReportRow>> {
    let trials = 100_000;
    let mut rng = seed.split(10).rng();
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a = 10.0 * unit_uniform(&mut rng);
        let b = 10.0 * unit_uniform(&mut rng);
        let order = rng.gen_range(2.0..=8.0);
        worst = worst.min(bregman_gap(a, b, order)?);
    }
    let floor = -1e-12;
    let mut rows = vec![ReportRow {
        check_name: "bregman_gap_nonnegative".into(),
        parameter_json: format!(
            "{{\"trials\":{trials},\"a_max\":10,\"order_min\":2,\"order_max\":8,\"seed\":{}}}",
            seed.0
        ),
        lhs: worst,
        rhs: floor,
        margin: worst - floor,
        mc_error: 0.0,
        pass: worst >= floor,
    }];

    let mut worst_equal = 0.0f64;
    for i in 0..=20u32 {
        let a = 0.5 * f64::from(i);
        for order in [2.0, 3.0, 5.5, 8.0] {
            worst_equal = worst_equal.max(bregman_gap(a, a, order)?.abs());
        }
    }
    rows.push(ReportRow {
        check_name: "bregman_gap_zero_at_equal_arguments".into(),
        parameter_json: "{\"grid\":21,\"orders\":[2,3,5.5,8]}".into(),
        lhs: worst_equal,
        rhs: 0.0,
        margin: -worst_equal,
        mc_error: 0.0,
        pass: worst_equal == 0.0,
    });

    let mut worst_quadratic = 0.0f64;
    for _ in 0..1000 {
        let a = 10.0 * unit_uniform(&mut rng);
        let b = 10.0 * unit_uniform(&mut rng);
        worst_quadratic = worst_quadratic.max(bregman_gap(a, b, 2.0)?.abs());
    }
    rows.push(ReportRow {
        check_name: "bregman_gap_zero_at_order_two".into(),
        parameter_json: format!("{{\"trials\":1000,\"a_max\":10,\"seed\":{}}}", seed.0),
        lhs: worst_quadratic,
        rhs: 0.0,
        margin: -worst_quadratic,
        mc_error: 0.0,
        pass: worst_quadratic == 0.0,
    });
    Ok(rows)
}

fn suite_bbm(seed: RngSeed) -> Result<Vec<ReportRow>> {
    let n = 1500;
    let orders = [1.5, 1.9, 1.99];
    let d = Dimension::new(1)?;
    let mut rng = seed.split(20).rng();
    let samples: Vec<Vec<f64>> = (0..n).map(|_| sample_gaussian(d, &mut rng)).collect();
    let f = TestFunction::tanh_ridge(vec![1.0], 1.0)?;
    let quad = QuadConfig::default();

    let local = dirichlet_form(&f, &samples, 2.0, &quad)?;
    let mut gaps = Vec::new();
    let mut mc_squared = local.mc_std_error * local.mc_std_error;
    for &alpha in &orders {
        let energy = dirichlet_form(&f, &samples, alpha, &quad)?;
        gaps.push((energy.value - local.value).abs());
        mc_squared += energy.mc_std_error * energy.mc_std_error;
    }
    let mc = mc_squared.sqrt();
    let worst_increment =
        gaps.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let relative = gaps[orders.len() - 1] / local.value;

    Ok(vec![
        ReportRow {
            check_name: "bbm_gap_decreases_toward_the_local_form".into(),
            parameter_json: format!(
                "{{\"samples\":{n},\"orders\":[1.5,1.9,1.99],\"seed\":{}}}",
                seed.0
            ),
            lhs: worst_increment,
            rhs: 0.0,
            margin: -worst_increment,
            mc_error: mc,
            pass: worst_increment < 0.0,
        },
        ReportRow {
            check_name: "bbm_limit_gap_within_five_percent".into(),
            parameter_json: format!("{{\"samples\":{n},\"order\":1.99,\"seed\":{}}}", seed.0),
            lhs: relative,
            rhs: 0.05,
            margin: 0.05 - relative,
            mc_error: mc / local.value,
            pass: relative <= 0.05,
        },
    ])
}

fn suite_sampler(seed: RngSeed) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let n_cf = 200_000;
    let xi: f64 = 1.5;
    let d = Dimension::new(1)?;
    for (stream, alpha) in [1.5, 1.9].into_iter().enumerate() {
        let index = StableIndex::new(alpha)?;
        let mut rng = seed.split(30 + stream as u64).rng();
        let mut cosines = Vec::with_capacity(n_cf);
        for _ in 0..n_cf {
            let x = sample_isotropic_stable(index, d, &mut rng)?;
            cosines.push((xi * x[0]).cos());
        }
        let (cf, se) = mean_and_se(&cosines);
        let deviation = (cf - (-xi.powf(alpha)).exp()).abs();
        rows.push(ReportRow {
            check_name: format!("sampler_cf_alpha_{alpha}"),
            parameter_json: format!(
                "{{\"samples\":{n_cf},\"xi\":{xi},\"alpha\":{alpha},\"seed\":{}}}",
                seed.0
            ),
            lhs: deviation,
            rhs: 0.01,
            margin: 0.01 - deviation,
            mc_error: se,
            pass: deviation <= 0.01,
        });
    }

    let n_ks = 100_000;
    let mut rng = seed.split(35).rng();
    let mut draws = Vec::with_capacity(n_ks);
    for _ in 0..n_ks {
        draws.push(sample_positive_stable(0.5, &mut rng)?);
    }
    draws.sort_by(|a, b| a.total_cmp(b));
    let mut ks = 0.0f64;
    for (i, x) in draws.iter().enumerate() {
        let cdf = erfc(1.0 / (2.0 * x.sqrt()));
        ks = ks.max((cdf - i as f64 / n_ks as f64).abs());
        ks = ks.max((cdf - (i + 1) as f64 / n_ks as f64).abs());
    }
    rows.push(ReportRow {
        check_name: "sampler_subordinator_ks".into(),
        parameter_json: format!(
            "{{\"samples\":{n_ks},\"alpha_prime\":0.5,\"seed\":{}}}",
            seed.0
        ),
        lhs: ks,
        rhs: 0.01,
        margin: 0.01 - ks,
        mc_error: 1.0 / (n_ks as f64).sqrt(),
        pass: ks <= 0.01,
    });
    Ok(rows)
}

fn suite_poincare(seed: RngSeed) -> Result<Vec<ReportRow>> {
    let n = 4000;
    let alpha = 1.5;
    let d = Dimension::new(1)?;
    let index = StableIndex::new(alpha)?;
    let mut rng = seed.split(40).rng();
    let stable: Vec<Vec<f64>> = (0..n)
        .map(|_| sample_isotropic_stable(index, d, &mut rng))
        .collect::<Result<_>>()?;
    let mut rng = seed.split(41).rng();
    let convolved: Vec<Vec<f64>> = (0..n)
        .map(|_| -> Result<Vec<f64>> {
            let x = sample_isotropic_stable(index, d, &mut rng)?;
            let y = sample_isotropic_stable(index, d, &mut rng)?;
            Ok(vec![x[0] + y[0]])
        })
        .collect::<Result<_>>()?;

    let single = PoincareConstants::new(1.0, 0.0)?;
    let summed = PoincareConstants::new(2.0, 0.0)?;
    let quad = QuadConfig::default();
    let cases: [(&str, TestFunction, &[Vec<f64>], PoincareConstants); 4] = [
        ("poincare_stable_bump", TestFunction::gaussian_bump(vec![0.0], 1.0)?, &stable, single),
        ("poincare_stable_ridge", TestFunction::tanh_ridge(vec![1.0], 1.0)?, &stable, single),
        ("poincare_stable_odd_bump", TestFunction::poly_bump(1)?, &stable, single),
        (
            "poincare_convolved_bump",
            TestFunction::gaussian_bump(vec![0.0], 1.0)?,
            &convolved,
            summed,
        ),
    ];

    let mut rows = Vec::new();
    for (name, f, samples, constants) in cases {
        let check = check_fractional_poincare(samples, &f, &constants, alpha, &quad)?;
        rows.push(ReportRow {
            check_name: name.into(),
            parameter_json: format!(
                "{{\"samples\":{n},\"alpha\":{alpha},\"frac\":{},\"gauss\":{},\"seed\":{}}}",
                constants.frac, constants.gauss, seed.0
            ),
            lhs: check.lhs,
            rhs: check.rhs,
            margin: check.margin,
            mc_error: check.mc_error,
            pass: check.margin >= -3.0 * check.mc_error,
        });
    }
    Ok(rows)
}

fn scalar_normals(seed: RngSeed, n: usize, mean: f64) -> Vec<f64> {
    let d = Dimension::new(1).expect("dimension 1 is valid");
    let mut rng = seed.rng();
    (0..n).map(|_| mean + sample_gaussian(d, &mut rng)[0]).collect()
}

fn suite_renyi(seed: RngSeed) -> Result<Vec<ReportRow>> {
    let order_two = RenyiOrder::new(2.0)?;

    let shared = scalar_normals(seed.split(50), 50_000, 0.0);
    let self_divergence = estimate_renyi(&shared, &shared, order_two, None)?;
    let mut rows = vec![ReportRow {
        check_name: "renyi_zero_on_identical_samples".into(),
        parameter_json: format!("{{\"samples\":50000,\"order\":2,\"seed\":{}}}", seed.0),
        lhs: self_divergence,
        rhs: 0.0,
        margin: -self_divergence.abs(),
        mc_error: 0.0,
        pass: self_divergence == 0.0,
    }];

    let shifted = scalar_normals(seed.split(51), 400_000, 1.0);
    let centered = scalar_normals(seed.split(52), 400_000, 0.0);
    let estimate = estimate_renyi(&shifted, &centered, order_two, Some(200))?;
    let target = gaussian_renyi(order_two, 1.0, 1.0)?;
    let deviation = (estimate - target).abs();
    rows.push(ReportRow {
        check_name: "renyi_gaussian_closed_form".into(),
        parameter_json: format!(
            "{{\"samples\":400000,\"bins\":200,\"mean_gap\":1,\"order\":2,\"seed\":{}}}",
            seed.0
        ),
        lhs: estimate,
        rhs: target,
        margin: 0.1 * target - deviation,
        mc_error: 0.0,
        pass: deviation <= 0.1 * target,
    });

    let p = scalar_normals(seed.split(53), 40_000, 0.3);
    let q = scalar_normals(seed.split(54), 40_000, 0.0);
    let mut estimates = Vec::new();
    for order in [1.5, 2.0, 4.0, 8.0] {
        estimates.push(estimate_renyi(&p, &q, RenyiOrder::new(order)?, Some(80))?);
    }
    let smallest_step =
        estimates.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    rows.push(ReportRow {
        check_name: "renyi_monotone_in_the_order".into(),
        parameter_json: format!(
            "{{\"samples\":40000,\"bins\":80,\"orders\":[1.5,2,4,8],\"seed\":{}}}",
            seed.0
        ),
        lhs: smallest_step,
        rhs: 0.0,
        margin: smallest_step,
        mc_error: 0.0,
        pass: smallest_step > 0.0,
    });
    Ok(rows)
}

fn suite_flow(seed: RngSeed) -> Result<Vec<ReportRow>> {
    let config = FlowCheckConfig {
        n: 10,
        data_gap: 2.0,
        step_size: 0.1,
        checkpoints: vec![10, 40, 80],
        trajectories: 20_000,
        beta: 2.0,
        sigma_2: 1.0,
        gamma: 1.0,
        bins: None,
        seed: seed.split(60),
    };
    let flow = flow_check(&config)?;
    let mut rows = Vec::new();
    for (step, row) in config.checkpoints.iter().zip(&flow) {
        rows.push(ReportRow {
            check_name: format!("flow_bound_at_step_{step}"),
            parameter_json: format!(
                "{{\"n\":{},\"data_gap\":{},\"step_size\":{},\"trajectories\":{},\"order\":{},\"seed\":{}}}",
                config.n, config.data_gap, config.step_size, config.trajectories, config.beta,
                seed.0
            ),
            lhs: row.kappa_hat,
            rhs: row.kappa_bound,
            margin: row.kappa_bound - row.kappa_hat,
            mc_error: 0.0,
            pass: row.kappa_hat <= row.kappa_bound,
        });
    }
    Ok(rows)
}

/// Runs one named suite, or every suite in order for `all`.
pub fn suite_rows(suite: &str, seed: RngSeed) -> Result<Vec<ReportRow>> {
    match suite {
        "bregman" => suite_bregman(seed),
        "bbm" => suite_bbm(seed),
        "sampler" => suite_sampler(seed),
        "poincare" => suite_poincare(seed),
        "renyi" => suite_renyi(seed),
        "flow" => suite_flow(seed),
        "all" => {
            let mut rows = Vec::new();
            for name in SUITE_NAMES {
                rows.extend(suite_rows(name, seed)?);
            }
            Ok(rows)
        }
        other => Err(Error::Config(format!("unknown verification suite '{other}'"))),
    }
}

/// Runs the configured suite and writes `report.csv`; exits 0 only when
/// every check passes.
pub fn cmd_verify(cfg: &mut RunConfig) -> Result<i32> {
    cfg.set_default("verify.seed", "0")?;
    let suite = cfg.require("verify.suite")?.to_string();
    let seed = RngSeed(cfg.require_u64("verify.seed")?);
    let rows = suite_rows(&suite, seed)?;

    let mut csv = Vec::new();
    write_report(&mut csv, &rows)?;
    let text = String::from_utf8(csv).expect("CSV output is UTF-8");
    let failures = rows.iter().filter(|row| !row.pass).count();
    let extras = [
        ("result.checks".to_string(), rows.len().to_string()),
        ("result.failures".to_string(), failures.to_string()),
    ];
    write_outputs(cfg, "report.csv", &text, &extras)?;
    print!("{text}");
    Ok(if failures == 0 { 0 } else { 1 })
}
