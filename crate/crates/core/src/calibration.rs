//! Saddle-path calibration of the initial control and the assembled
//! solution handle.

use serde::{Deserialize, Serialize};

use crate::closed_form::{
    b_remaining, b_star, costates_at, f_remaining, f_star, h_from, initial_consumption, k_from, u_form1_from,
    u_form2_from, Calibration, ZPath,
};
use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::numerics::{scan_all_brackets, try_find_root, ToleranceSettings};
use crate::params::{validate, InitialEndowment, Model, ModelParams};

pub const SCAN_POINTS: usize = 512;
pub const SCAN_EPS: f64 = 1e-6;

/// Jump-condition residual
/// `G(u0) = (varphi + de u0) F*(z0) - de u0 B*(z0)` with
/// `z0 = h0^eta u0 / k0`.
pub fn jump_residual(model: &Model, endow: &InitialEndowment, u0: f64, tol: &ToleranceSettings) -> Result<f64> {
    let z0 = initial_ratio(model, endow, u0);
    let fs = f_star(model, z0, tol)?;
    let bs = b_star(model, z0, tol)?;
    let de = model.delta_eta();
    Ok((model.constants.varphi + de * u0) * fs - de * u0 * bs)
}

pub fn initial_ratio(model: &Model, endow: &InitialEndowment, u0: f64) -> f64 {
    endow.h0.powf(model.constants.eta) * u0 / endow.k0
}

/// A maximal run of grid points sharing the sign of the jump residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignRun {
    pub from: f64,
    pub to: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub xi_positive: bool,
    pub xi_above_varphi: bool,
    pub u_star_interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationDiagnostics {
    pub residual: f64,
    /// `|residual| / (varphi F*)`.
    pub scaled_residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub f_star: f64,
    pub b_star: f64,
    pub scan_points: usize,
    pub sign_runs: Vec<SignRun>,
    pub skipped: Vec<f64>,
    pub feasibility: Feasibility,
}

fn sign_runs(signs: &[(f64, i8)]) -> Vec<SignRun> {
    let mut runs: Vec<SignRun> = Vec::new();
    for &(x, s) in signs {
        match runs.last_mut() {
            Some(run) if run.sign == s => run.to = x,
            _ => runs.push(SignRun {
                from: x,
                to: x,
                sign: s,
            }),
        }
    }
    runs
}

fn format_runs(runs: &[SignRun]) -> String {
    runs.iter()
        .map(|r| {
            let s = match r.sign {
                1 => "+",
                -1 => "-",
                _ => "0",
            };
            format!("{s}[{:.6}, {:.6}]", r.from, r.to)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn feasibility(model: &Model) -> Feasibility {
    let c = &model.constants;
    Feasibility {
        xi_positive: c.xi > 0.0,
        xi_above_varphi: c.xi > c.varphi,
        u_star_interior: c.u_star > 0.0 && c.u_star < 1.0,
    }
}

/// Locate the unique interior root of the jump residual and assemble the
/// implied initial data. More than one sign change is an error, never
/// resolved silently.
pub fn calibrate(
    model: &Model,
    endow: &InitialEndowment,
    tol: &ToleranceSettings,
) -> Result<(Calibration, CalibrationDiagnostics)> {
    let report = validate(&model.params);
    if report.has_errors() {
        return Err(Error::InvalidParams(report));
    }
    tol.validate()?;

    let scan = scan_all_brackets(
        |u| jump_residual(model, endow, u, tol),
        SCAN_EPS,
        1.0 - SCAN_EPS,
        SCAN_POINTS,
    )?;
    let runs = sign_runs(&scan.signs);
    let bracket = match scan.brackets.as_slice() {
        [] => {
            return Err(Error::NoBracket {
                sign_runs: format_runs(&runs),
            })
        }
        [one] => *one,
        many => {
            return Err(Error::MultipleBrackets {
                brackets: many.to_vec(),
            })
        }
    };

    let root = try_find_root(
        |u| jump_residual(model, endow, u, tol),
        bracket.0,
        bracket.1,
        tol.root_tol,
    )?;
    let u0 = root.x;
    let z0 = initial_ratio(model, endow, u0);
    let fs = f_star(model, z0, tol)?;
    let bs = b_star(model, z0, tol)?;
    let c0 = initial_consumption(model, endow, z0, fs);
    let (lambda0, mu0) = costates_at(model, endow.k0, endow.h0, c0, u0)?;
    let calibration = Calibration {
        u0,
        c0,
        z0,
        f_star: fs,
        b_star: bs,
        lambda0,
        mu0,
    };
    let residual = calibration.jump_gap(model);
    let diagnostics = CalibrationDiagnostics {
        residual,
        scaled_residual: residual.abs() / (model.constants.varphi * fs),
        bracket,
        iterations: root.iterations,
        f_star: fs,
        b_star: bs,
        scan_points: SCAN_POINTS,
        sign_runs: runs,
        skipped: scan.skipped,
        feasibility: feasibility(model),
    };
    Ok((calibration, diagnostics))
}

/// Closed-form quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormPoint {
    pub t: f64,
    pub z: f64,
    pub f_remaining: f64,
    pub b_remaining: f64,
    pub k: f64,
    pub h: f64,
    pub c: f64,
    pub u_form1: f64,
    pub u_form2: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ClosedFormPoint {
    pub fn state(&self) -> StateVector {
        StateVector {
            k: self.k,
            h: self.h,
            c: self.c,
            u: self.u_form1,
            lambda: self.lambda,
            mu: self.mu,
        }
    }
}

/// Parameters, endowment and calibration bundled so that every closed-form
/// evaluator and simulator can be driven from one value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionPath {
    pub model: Model,
    pub endowment: InitialEndowment,
    pub calibration: Calibration,
    pub diagnostics: CalibrationDiagnostics,
    pub tol: ToleranceSettings,
}

pub fn assemble_solution(
    params: ModelParams,
    endowment: InitialEndowment,
    tol: ToleranceSettings,
) -> Result<SolutionPath> {
    let model = Model::new(params)?;
    let (calibration, diagnostics) = calibrate(&model, &endowment, &tol)?;
    Ok(SolutionPath {
        model,
        endowment,
        calibration,
        diagnostics,
        tol,
    })
}

impl SolutionPath {
    pub fn z_path(&self) -> ZPath {
        ZPath::new(&self.model, self.calibration.z0)
    }

    pub fn z(&self, t: f64) -> f64 {
        self.z_path().at(t)
    }

    pub fn f_remaining(&self, t: f64) -> Result<f64> {
        f_remaining(&self.model, self.calibration.z0, t, &self.tol)
    }

    pub fn b_remaining(&self, t: f64) -> Result<f64> {
        b_remaining(&self.model, self.calibration.z0, t, &self.tol)
    }

    pub fn k(&self, t: f64) -> Result<f64> {
        Ok(k_from(
            &self.model,
            &self.calibration,
            &self.endowment,
            t,
            self.z(t),
            self.f_remaining(t)?,
        ))
    }

    pub fn c(&self, t: f64) -> f64 {
        crate::closed_form::c_at(&self.model, &self.calibration, &self.endowment, t)
    }

    pub fn u_form1(&self, t: f64) -> Result<f64> {
        u_form1_from(
            &self.model,
            &self.calibration,
            t,
            self.f_remaining(t)?,
            self.b_remaining(t)?,
        )
    }

    pub fn u_form2(&self, t: f64) -> Result<f64> {
        u_form2_from(
            &self.model,
            &self.calibration,
            &self.endowment,
            t,
            self.z(t),
            self.f_remaining(t)?,
        )
    }

    /// Human capital composed with the first-set control.
    pub fn h(&self, t: f64) -> Result<f64> {
        let f_rem = self.f_remaining(t)?;
        let u = u_form1_from(&self.model, &self.calibration, t, f_rem, self.b_remaining(t)?)?;
        h_from(&self.model, &self.calibration, &self.endowment, t, f_rem, u)
    }

    /// Human capital composed with an arbitrary control value.
    pub fn h_with(&self, t: f64, u: f64) -> Result<f64> {
        h_from(
            &self.model,
            &self.calibration,
            &self.endowment,
            t,
            self.f_remaining(t)?,
            u,
        )
    }

    pub fn point(&self, t: f64) -> Result<ClosedFormPoint> {
        let (m, cal, e) = (&self.model, &self.calibration, &self.endowment);
        let z = self.z(t);
        let f_rem = self.f_remaining(t)?;
        let b_rem = self.b_remaining(t)?;
        let k = k_from(m, cal, e, t, z, f_rem);
        let c = self.c(t);
        let u_form1 = u_form1_from(m, cal, t, f_rem, b_rem)?;
        let u_form2 = u_form2_from(m, cal, e, t, z, f_rem)?;
        let h = h_from(m, cal, e, t, f_rem, u_form1)?;
        let (lambda, mu) = costates_at(m, k, h, c, u_form1).map_err(|err| match err {
            Error::NonPositiveState { component, value, .. } => Error::NonPositiveState { component, value, t },
            other => other,
        })?;
        Ok(ClosedFormPoint {
            t,
            z,
            f_remaining: f_rem,
            b_remaining: b_rem,
            k,
            h,
            c,
            u_form1,
            u_form2,
            lambda,
            mu,
        })
    }

    pub fn initial_state(&self) -> StateVector {
        StateVector {
            k: self.endowment.k0,
            h: self.endowment.h0,
            c: self.calibration.c0,
            u: self.calibration.u0,
            lambda: self.calibration.lambda0,
            mu: self.calibration.mu0,
        }
    }

    /// Copy of this solution with the initial control overwritten. Only the
    /// control changes; the other calibrated quantities are kept, so the
    /// result is deliberately inconsistent.
    pub fn with_forced_u0(&self, u0: f64) -> Self {
        let mut forged = self.clone();
        forged.calibration.u0 = u0;
        forged
    }
}
