//! Scenario runner behind the `cpg` binary: CSV traces, run summaries,
//! feasibility reports and γ comparisons.

use std::io::Write;

use cpg_core::cpg::StepRecord;
use cpg_core::scenario::{RunSummary, Scenario};
use cpg_core::trajectory::FeasibilityClass;
use cpg_core::CpgError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(CpgError),
    #[error("{0}")]
    Numerical(CpgError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for numerical failures during a run, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

fn run_error(e: CpgError) -> CliError {
    match e {
        CpgError::NonFiniteState { .. } | CpgError::NumericalSingularity(_) => {
            CliError::Numerical(e)
        }
        other => CliError::Validation(other),
    }
}

pub fn load(path: &std::path::Path) -> Result<Scenario, CliError> {
    Scenario::load(path).map_err(CliError::Validation)
}

/// `t,phi,s1_0..,s2_0..,y_0..,ydot_0..,f_0..,V3,dphi`.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_owned(), "phi".to_owned()];
    for prefix in ["s1", "s2", "y", "ydot", "f"] {
        h.extend((0..n).map(|i| format!("{prefix}_{i}")));
    }
    h.push("V3".into());
    h.push("dphi".into());
    h
}

/// Scientific notation with 17 significant digits, enough to recover the
/// exact `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(r: &StepRecord<f64>) -> Vec<String> {
    let mut row = vec![format_float(r.t), format_float(r.phi)];
    for v in [&r.s1, &r.s2, &r.y, &r.ydot, &r.f] {
        row.extend(v.iter().map(|&x| format_float(x)));
    }
    row.push(format_float(r.v3));
    row.push(format_float(r.dphi));
    row
}

/// Runs `scenario` (optionally overriding γ) and streams one CSV row per
/// record into `out`.
pub fn run_to_csv<W: Write>(
    scenario: &Scenario,
    gamma: Option<f64>,
    out: W,
) -> Result<RunSummary, CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(scenario.limits().dim()))?;
    let mut write_err = None;
    let summary = scenario
        .run(gamma, |r| {
            if write_err.is_none() {
                if let Err(e) = w.write_record(csv_row(r)) {
                    write_err = Some(e);
                }
            }
        })
        .map_err(run_error)?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    w.flush()?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct MotionReport {
    pub id: String,
    pub class: FeasibilityClass,
    pub nominal_period: f64,
    pub min_period: f64,
    pub max_transform_ratio: f64,
    pub max_abs_rate: Vec<f64>,
    pub min_position_margin: f64,
}

/// Feasibility report for every motion in the scenario's library.
pub fn validate(scenario: &Scenario) -> Vec<MotionReport> {
    scenario
        .library
        .iter()
        .map(|(id, e)| MotionReport {
            id: id.to_owned(),
            class: e.class(),
            nominal_period: e.nominal.period(),
            min_period: e.min_period,
            max_transform_ratio: e.feasibility.max_transform_ratio,
            max_abs_rate: e.feasibility.max_abs_rate.clone(),
            min_position_margin: e.feasibility.min_position_margin,
        })
        .collect()
}

/// Runs the scenario once per γ without writing traces.
pub fn compare_gamma(scenario: &Scenario, gammas: &[f64]) -> Result<Vec<RunSummary>, CliError> {
    gammas
        .iter()
        .map(|&g| scenario.run(Some(g), |_| {}).map_err(run_error))
        .collect()
}

/// Parses `0,10` into `[0.0, 10.0]`.
pub fn parse_gammas(s: &str) -> Result<Vec<f64>, CliError> {
    let gammas: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match gammas {
        Ok(g) if !g.is_empty() && g.iter().all(|v| v.is_finite() && *v >= 0.0) => Ok(g),
        _ => Err(CliError::Usage(format!(
            "expected comma-separated non-negative numbers, got `{s}`"
        ))),
    }
}
