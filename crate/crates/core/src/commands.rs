//! The four CLI commands. Each one writes its artifacts into an output
//! directory and returns the process exit code.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::{calibrate, CalibrationDiagnostics, SolutionPath};
use crate::closed_form::{welfare, Calibration};
use crate::config::RunConfig;
use crate::dynamics::{simulate_foc, simulate_scalar_u};
use crate::error::{Error, Result};
use crate::numerics::ToleranceSettings;
use crate::output::{ensure_dir, format_number, numbers, write_csv, write_json};
use crate::params::{validate, DerivedConstants, InitialEndowment, Model, ModelParams};
use crate::verification::{foc_residuals_at, run_all, uniform_grid, Verdict, VerificationSettings};

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const CALIBRATION_JSON: &str = "calibration.json";
pub const VERIFICATION_JSON: &str = "verification.json";
pub const COMPARISON_CSV: &str = "comparison.csv";
pub const SWEEP_CSV: &str = "sweep.csv";

pub const TRAJECTORY_COLUMNS: [&str; 15] = [
    "t", "k", "h", "c", "u_form1", "u_form2", "z", "lambda", "mu", "F", "B", "res_k", "res_h", "res_c", "res_u",
];

pub const COMPARISON_COLUMNS: [&str; 9] = [
    "t",
    "u_form1",
    "u_form2",
    "u_simulated",
    "u_scalar_ode",
    "gap_form2",
    "gap_simulated",
    "gap_scalar_ode",
    "tolerance",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InvalidInput = 1,
    SolveFailed = 2,
    CheckFailed = 3,
    Io = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_error(err: &Error) -> Self {
        match err {
            Error::InvalidParams(_) | Error::InvalidEndowment { .. } | Error::InvalidConfig(_) => {
                ExitStatus::InvalidInput
            }
            Error::Io { .. } | Error::Json(_) => ExitStatus::Io,
            _ => ExitStatus::SolveFailed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub written: Vec<PathBuf>,
    pub message: String,
}

/// Build the model and calibrate it; parameter and endowment problems come
/// out as input errors, everything after as solve failures.
pub fn prepare(config: &RunConfig) -> Result<SolutionPath> {
    let model = Model::new(config.params())?;
    let endowment = config.endowment()?;
    let (calibration, diagnostics) = calibrate(&model, &endowment, &config.tolerances)?;
    Ok(SolutionPath {
        model,
        endowment,
        calibration,
        diagnostics,
        tol: config.tolerances,
    })
}

/// Evaluate `f` over `items` in parallel and return the results in order, or
/// the error of the earliest failing item.
fn ordered<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    items.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

/// Finite-difference step of the residual columns.
const FD_STEP: f64 = 1e-4;

pub fn trajectory_row(sol: &SolutionPath, t: f64) -> Result<[f64; 15]> {
    let p = sol.point(t)?;
    let res = foc_residuals_at(sol, t, FD_STEP)?;
    let cal = &sol.calibration;
    Ok([
        t,
        p.k,
        p.h,
        p.c,
        p.u_form1,
        p.u_form2,
        p.z,
        p.lambda,
        p.mu,
        cal.f_star - p.f_remaining,
        cal.b_star - p.b_remaining,
        res[0],
        res[1],
        res[2],
        res[3],
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationArtifact {
    pub params: ModelParams,
    pub endowment: InitialEndowment,
    pub constants: DerivedConstants,
    pub calibration: Calibration,
    pub diagnostics: CalibrationDiagnostics,
    pub tolerances: ToleranceSettings,
    pub welfare: Option<f64>,
    pub welfare_error: Option<String>,
    pub warnings: Vec<String>,
}

impl CalibrationArtifact {
    pub fn new(sol: &SolutionPath) -> Self {
        let (welfare, welfare_error) = match welfare(&sol.model, &sol.calibration, &sol.endowment, &sol.tol) {
            Ok(w) => (Some(w.value), None),
            Err(err) => (None, Some(err.to_string())),
        };
        Self {
            params: sol.model.params,
            endowment: sol.endowment,
            constants: sol.model.constants,
            calibration: sol.calibration,
            diagnostics: sol.diagnostics.clone(),
            tolerances: sol.tol,
            welfare,
            welfare_error,
            warnings: validate(&sol.model.params)
                .warnings()
                .map(|w| format!("{}: {}", w.rule, w.message))
                .collect(),
        }
    }
}

pub fn cmd_solve(config: &RunConfig, out: &Path) -> Result<Outcome> {
    let sol = prepare(config)?;
    let grid = uniform_grid(config.horizon, config.output_step);
    let rows = ordered(&grid, |&t| trajectory_row(&sol, t))?;
    ensure_dir(out)?;
    let csv_path = out.join(TRAJECTORY_CSV);
    let json_path = out.join(CALIBRATION_JSON);
    let rows: Vec<Vec<String>> = rows.iter().map(|r| numbers(r)).collect();
    write_csv(&csv_path, &TRAJECTORY_COLUMNS, &rows)?;
    write_json(&json_path, &CalibrationArtifact::new(&sol))?;
    Ok(Outcome {
        status: ExitStatus::Success,
        written: vec![csv_path, json_path],
        message: format!(
            "u0 = {}, c0 = {}, {} rows",
            format_number(sol.calibration.u0),
            format_number(sol.calibration.c0),
            rows.len()
        ),
    })
}

pub fn cmd_verify(config: &RunConfig, out: &Path, force_u0: Option<f64>) -> Result<Outcome> {
    let mut sol = prepare(config)?;
    if let Some(u0) = force_u0 {
        sol = sol.with_forced_u0(u0);
    }
    let report = run_all(&sol, &config.verification_settings());
    ensure_dir(out)?;
    let path = out.join(VERIFICATION_JSON);
    write_json(&path, &report)?;
    let failed: Vec<&str> = report
        .verdicts
        .iter()
        .filter(|v| v.verdict == Verdict::Fail)
        .map(|v| v.check)
        .collect();
    let (status, message) = if failed.is_empty() {
        (ExitStatus::Success, "all checks passed".to_string())
    } else {
        (ExitStatus::CheckFailed, format!("failed checks: {}", failed.join(", ")))
    };
    Ok(Outcome {
        status,
        written: vec![path],
        message,
    })
}

pub fn cmd_compare(config: &RunConfig, out: &Path) -> Result<Outcome> {
    let sol = prepare(config)?;
    let grid = uniform_grid(config.compare_horizon, config.output_step);
    let settings = VerificationSettings::default();
    let mut rows = Vec::with_capacity(grid.len());
    if !grid.is_empty() {
        let horizon = config.compare_horizon;
        let full = simulate_foc(&sol.model, &sol.initial_state(), horizon, &sol.tol)?;
        let scalar = simulate_scalar_u(&sol.model, &sol.calibration, horizon, &sol.tol)?;
        let closed = ordered(&grid, |&t| Ok((sol.u_form1(t)?, sol.u_form2(t)?)))?;
        for (&t, (u1, u2)) in grid.iter().zip(closed) {
            let u_sim = full.eval_component(t, 3)?;
            let u_ode = scalar.eval_component(t, 0)?;
            let gap = |u: f64| (u - u1).abs() / u1;
            rows.push(numbers(&[
                t,
                u1,
                u2,
                u_sim,
                u_ode,
                gap(u2),
                gap(u_sim),
                gap(u_ode),
                settings.schedule(t),
            ]));
        }
    }
    ensure_dir(out)?;
    let path = out.join(COMPARISON_CSV);
    write_csv(&path, &COMPARISON_COLUMNS, &rows)?;
    Ok(Outcome {
        status: ExitStatus::Success,
        written: vec![path],
        message: format!("{} rows", rows.len()),
    })
}

/// Summary columns of a sweep row after the axis values.
pub const SWEEP_SUMMARY_COLUMNS: [&str; 15] = [
    "status",
    "u0",
    "u_star",
    "f_star",
    "b_star",
    "c0",
    "welfare",
    "equivalence",
    "uniqueness",
    "admissibility",
    "transversality",
    "foc_residuals",
    "bgp_asymptotics",
    "comparison",
    "overall",
];

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Informational => "informational",
    }
}

fn sweep_row(config: &RunConfig) -> Vec<String> {
    let report = validate(&config.params());
    if report.has_errors() {
        let rules: Vec<String> = report.errors().map(|v| v.rule.to_string()).collect();
        return status_only(format!("infeasible: {}", rules.join("; ")));
    }
    let sol = match prepare(config) {
        Ok(sol) => sol,
        Err(err @ Error::InvalidEndowment { .. }) => return status_only(format!("invalid: {err}")),
        Err(err) => return status_only(format!("failed: {err}")),
    };
    let verification = run_all(&sol, &config.verification_settings());
    let welfare = CalibrationArtifact::new(&sol).welfare;
    let cal = &sol.calibration;
    let mut row = vec!["ok".to_string()];
    row.extend(numbers(&[
        cal.u0,
        sol.model.constants.u_star,
        cal.f_star,
        cal.b_star,
        cal.c0,
    ]));
    row.push(welfare.map(format_number).unwrap_or_default());
    row.extend(
        verification
            .verdicts
            .iter()
            .map(|v| verdict_label(v.verdict).to_string()),
    );
    row.push(verdict_label(verification.overall).to_string());
    row
}

fn status_only(status: String) -> Vec<String> {
    let mut row = vec![String::new(); SWEEP_SUMMARY_COLUMNS.len()];
    row[0] = status;
    row
}

/// One summary row per grid point. Infeasible or failing points are
/// recorded in the status column; only I/O problems are fatal.
pub fn cmd_sweep(config: &RunConfig, out: &Path) -> Result<Outcome> {
    if config.sweep.is_none() {
        return Err(Error::InvalidConfig(
            "sweep command needs a \"sweep\" object".to_string(),
        ));
    }
    let axes = config.sweep_axes();
    let points = config.sweep_points();
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|(values, point)| {
            let mut row = numbers(values);
            row.extend(sweep_row(point));
            row
        })
        .collect();
    let mut header: Vec<&str> = axes.clone();
    header.extend(SWEEP_SUMMARY_COLUMNS);
    ensure_dir(out)?;
    let path = out.join(SWEEP_CSV);
    write_csv(&path, &header, &rows)?;
    Ok(Outcome {
        status: ExitStatus::Success,
        written: vec![path],
        message: format!("{} points", rows.len()),
    })
}
