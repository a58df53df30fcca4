use thiserror::Error;

use crate::numerics::NumericsError;
use crate::params::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", summarize(.0))]
    InvalidParams(ValidationReport),
    #[error("invalid endowment k0 = {k0}, h0 = {h0}: both must be finite and > 0")]
    InvalidEndowment { k0: f64, h0: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("improper integral diverges: decay rate {rate} is not positive")]
    DivergentIntegral { rate: f64 },
    #[error("welfare integral diverges: rho + (sigma-1)*chi = {rate} is not positive")]
    DivergentWelfare { rate: f64 },
    #[error("vanishing denominator in {what} at t = {t}")]
    VanishingDenominator { what: &'static str, t: f64 },
    #[error("remaining integral F* - F(t) underflowed at t = {t}")]
    HorizonExceeded { t: f64 },
    #[error("non-positive {component} = {value} at t = {t}")]
    NonPositiveState {
        component: &'static str,
        value: f64,
        t: f64,
    },
    #[error("non-finite {component} in the optimality system")]
    NonFiniteDerivative { component: &'static str },
    #[error("no sign change of the jump residual on (0, 1); sign runs: {sign_runs}")]
    NoBracket { sign_runs: String },
    #[error("jump residual changes sign {} times on (0, 1): {brackets:?}", brackets.len())]
    MultipleBrackets { brackets: Vec<(f64, f64)> },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn summarize(report: &ValidationReport) -> String {
    report
        .errors()
        .map(|v| format!("{} ({})", v.rule, v.message))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
