//! Numerical kernels shared by the rest of the crate: an embedded
//! Runge–Kutta integrator with dense output, globally adaptive
//! Gauss–Kronrod quadrature, and bracketed root finding.
//!
//! Every kernel comes in two flavours. The plain version takes an
//! infallible closure; the `try_` version takes a closure returning
//! `Result<_, E>` where `E: From<NumericsError>`, so model-level errors
//! raised inside a callback surface unchanged.

mod ode;
mod quadrature;
mod roots;

pub use ode::{integrate_fixed_step, integrate_ode, try_integrate_ode, DenseTrajectory};
pub use quadrature::{adaptive_quadrature, try_adaptive_quadrature, QuadratureResult};
pub use roots::{find_root, scan_all_brackets, scan_bracket, try_find_root, Root, ScanOutcome};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: u64 },
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("invalid integration span [{t0}, {t1}]")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("t = {t} lies outside the trajectory span [{t0}, {t1}]")]
    OutOfSpan { t: f64, t0: f64, t1: f64 },
    #[error("quadrature subdivision limit ({limit}) reached; error estimate {error}")]
    SubdivisionLimit { limit: usize, error: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("invalid quadrature interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("no sign change on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("root finding did not converge within {iterations} iterations")]
    MaxIterations { iterations: usize },
    #[error("function returned a non-finite value at x = {x}")]
    NonFiniteFunction { x: f64 },
    #[error("invalid tolerance settings: {0}")]
    InvalidTolerance(String),
}

/// Tolerances for every numerical kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSettings {
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub quad_tol: f64,
    pub root_tol: f64,
    pub max_steps: u64,
}

impl Default for ToleranceSettings {
    fn default() -> Self {
        Self {
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-12,
            quad_tol: 1e-12,
            root_tol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl ToleranceSettings {
    pub fn validate(&self) -> Result<(), NumericsError> {
        let named = [
            ("ode_rel_tol", self.ode_rel_tol),
            ("ode_abs_tol", self.ode_abs_tol),
            ("quad_tol", self.quad_tol),
            ("root_tol", self.root_tol),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(NumericsError::InvalidTolerance(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if self.max_steps < 1 {
            return Err(NumericsError::InvalidTolerance("max_steps must be >= 1".to_string()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerances_are_valid() {
        let tol = ToleranceSettings::default();
        assert!(tol.validate().is_ok());
        assert_eq!(tol.max_steps, 1_000_000);
    }

    #[test]
    fn rejects_non_positive_tolerances() {
        let tol = ToleranceSettings {
            quad_tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(tol.validate(), Err(NumericsError::InvalidTolerance(_))));
        let tol = ToleranceSettings {
            max_steps: 0,
            ..Default::default()
        };
        assert!(tol.validate().is_err());
    }
}
