//! The six-equation optimality system, the scalar control equation obtained
//! by substituting the closed-form capital and consumption paths, and their
//! numerical integration.

use serde::{Deserialize, Serialize};

use crate::closed_form::{f_remaining, z_at, Calibration};
use crate::error::{Error, Result};
use crate::numerics::{try_integrate_ode, DenseTrajectory, ToleranceSettings};
use crate::params::Model;

/// Smallest admissible value of `F* - F(t)` in the scalar control equation.
const REMAINING_FLOOR: f64 = 1e-290;

pub const COMPONENTS: [&str; 6] = ["k", "h", "c", "u", "lambda", "mu"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub k: f64,
    pub h: f64,
    pub c: f64,
    pub u: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl StateVector {
    pub fn to_array(&self) -> [f64; 6] {
        [self.k, self.h, self.c, self.u, self.lambda, self.mu]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Self {
            k: y[0],
            h: y[1],
            c: y[2],
            u: y[3],
            lambda: y[4],
            mu: y[5],
        }
    }

    /// Composite ratio `h^eta u / k`.
    pub fn z(&self, model: &Model) -> f64 {
        self.h.powf(model.constants.eta) * self.u / self.k
    }

    fn check_positive(&self, t: f64) -> Result<()> {
        for (component, value) in COMPONENTS.iter().zip(self.to_array()) {
            if !(value > 0.0) {
                return Err(Error::NonPositiveState { component, value, t });
            }
        }
        Ok(())
    }
}

/// Right-hand side of the optimality system, in the order
/// (k, h, c, u, lambda, mu).
pub fn foc_rhs(model: &Model, s: &StateVector) -> Result<[f64; 6]> {
    let p = &model.params;
    let (beta, sigma) = (p.beta, p.sigma);
    let zb = s.z(model).powf(1.0 - beta);
    let dk = (p.gamma * zb - p.pi) * s.k - s.c;
    let dh = p.delta * (1.0 - s.u) * s.h;
    let dc = (-(p.rho + p.pi) / sigma + p.gamma * beta / sigma * zb) * s.c;
    let u_const = ((p.delta + p.pi) * (1.0 - beta) + p.theta * p.delta) / beta;
    let u_slope = p.delta * (1.0 - beta + p.theta) / (1.0 - beta);
    let du = (u_const - s.c / s.k + u_slope * s.u) * s.u;
    let dlambda = (p.rho + p.pi - p.gamma * beta * zb) * s.lambda;
    let dmu = (p.rho - p.delta - p.theta * p.delta / (1.0 - beta) * s.u) * s.mu;
    let out = [dk, dh, dc, du, dlambda, dmu];
    for (component, v) in COMPONENTS.iter().zip(out) {
        if !v.is_finite() {
            return Err(Error::NonFiniteDerivative { component });
        }
    }
    Ok(out)
}

/// Scalar control equation along the closed-form capital and consumption
/// paths: `u' = [varphi - z^p e^(-xi t) / (F* - F(t)) + delta eta u] u`.
pub fn scalar_u_rhs(model: &Model, cal: &Calibration, t: f64, u: f64, tol: &ToleranceSettings) -> Result<f64> {
    let f_rem = f_remaining(model, cal.z0, t, tol)?;
    if !(f_rem > REMAINING_FLOOR) {
        return Err(Error::HorizonExceeded { t });
    }
    let z = z_at(model, cal.z0, t);
    let ratio = z.powf(model.integrand_power()) * (-model.constants.xi * t).exp() / f_rem;
    Ok((model.constants.varphi - ratio + model.delta_eta() * u) * u)
}

/// Integrate the optimality system forward from `initial` on `[0, horizon]`.
/// Loss of positivity in any component is reported with the time at which
/// it was first seen.
pub fn simulate_foc(
    model: &Model,
    initial: &StateVector,
    horizon: f64,
    tol: &ToleranceSettings,
) -> Result<DenseTrajectory> {
    initial.check_positive(0.0)?;
    try_integrate_ode(
        |t, y: &[f64], dy: &mut [f64]| {
            let s = StateVector::from_slice(y);
            s.check_positive(t)?;
            dy.copy_from_slice(&foc_rhs(model, &s)?);
            Ok::<(), Error>(())
        },
        &initial.to_array(),
        0.0,
        horizon,
        tol,
    )
}

/// Integrate the scalar control equation from `u_init` on `[0, horizon]`.
pub fn simulate_scalar_u_from(
    model: &Model,
    cal: &Calibration,
    u_init: f64,
    horizon: f64,
    tol: &ToleranceSettings,
) -> Result<DenseTrajectory> {
    try_integrate_ode(
        |t, y: &[f64], dy: &mut [f64]| {
            dy[0] = scalar_u_rhs(model, cal, t, y[0], tol)?;
            Ok::<(), Error>(())
        },
        &[u_init],
        0.0,
        horizon,
        tol,
    )
}

/// Integrate the scalar control equation from the calibrated `u0`.
pub fn simulate_scalar_u(
    model: &Model,
    cal: &Calibration,
    horizon: f64,
    tol: &ToleranceSettings,
) -> Result<DenseTrajectory> {
    simulate_scalar_u_from(model, cal, cal.u0, horizon, tol)
}

/// Current-value Hamiltonian.
pub fn hamiltonian(model: &Model, s: &StateVector) -> f64 {
    let p = &model.params;
    let eta = model.constants.eta;
    let utility = (s.c.powf(1.0 - p.sigma) - 1.0) / (1.0 - p.sigma);
    let output = p.gamma * s.k.powf(p.beta) * (s.h.powf(eta) * s.u).powf(1.0 - p.beta);
    utility + (output - p.pi * s.k - s.c) * s.lambda + p.delta * (1.0 - s.u) * s.h * s.mu
}
