//! Numerical verification bench.
//!
//! Everything here estimates from samples what the analytic layer claims
//! in closed form: Renyi divergences between empirical parameter clouds
//! ([`histogram`]), fractional Dirichlet forms by direct radial
//! quadrature ([`dirichlet`]) and by the spherical route
//! ([`dirichlet::spherical_j`]), the pointwise Bregman inequality
//! ([`bregman`]), empirical Poincare inequalities ([`poincare_check`]),
//! and end-to-end divergence flows of simulated trajectory pairs
//! ([`flow`]). Estimators are deterministic given their samples and
//! seeds, and report their Monte-Carlo and quadrature error budgets
//! alongside each value.

pub mod bregman;
pub mod dirichlet;
pub mod flow;
pub mod histogram;
pub mod poincare_check;
pub mod test_functions;

pub use bregman::bregman_gap;
pub use dirichlet::{
    dirichlet_form, reconstruct_via_spherical, spherical_j, DirichletEstimate, JEstimate,
    QuadConfig,
};
pub use flow::{flow_check, FlowCheckConfig, FlowRow};
pub use histogram::{estimate_renyi, gaussian_renyi, DensityEstimate};
pub use poincare_check::{check_fractional_poincare, PoincareCheck};
pub use test_functions::TestFunction;

use std::io::Write;

use crate::csvio;

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub check_name: String,
    /// Inputs of the check as a small JSON object, for reproducibility.
    pub parameter_json: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub mc_error: f64,
    pub pass: bool,
}

impl ReportRow {
    pub const CSV_HEADER: [&'static str; 7] =
        ["check_name", "parameter_json", "lhs", "rhs", "margin", "mc_error", "pass"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.check_name.clone(),
            self.parameter_json.clone(),
            csvio::fmt_f64(self.lhs),
            csvio::fmt_f64(self.rhs),
            csvio::fmt_f64(self.margin),
            csvio::fmt_f64(self.mc_error),
            self.pass.to_string(),
        ]
    }
}

/// Writes a verification report with its header line.
pub fn write_report<W: Write>(out: &mut W, rows: &[ReportRow]) -> std::io::Result<()> {
    csvio::write_record(out, &ReportRow::CSV_HEADER)?;
    for row in rows {
        csvio::write_record(out, &row.fields())?;
    }
    Ok(())
}
