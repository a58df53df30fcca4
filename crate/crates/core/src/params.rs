//! Structural parameters, endowments and the derived rates used by the
//! closed-form solution.
//!
//! The externality `theta`, not the technology level `gamma`, enters the
//! human-capital exponent `(1-beta)/(1-beta+theta)` and the rate
//! `varphi = ((delta+pi)(1-beta)+theta*delta)/beta`. The control equation of
//! the optimality system carries `theta` in the same slot, and only this
//! form reproduces `z = h^eta * u / k` from the closed forms.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::Error;

/// The seven structural parameters of the two-sector economy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Output elasticity of physical capital, in (0, 1).
    pub beta: f64,
    /// Inverse elasticity of intertemporal substitution.
    pub sigma: f64,
    /// Discount rate.
    pub rho: f64,
    /// Education-sector technology level.
    pub delta: f64,
    /// Goods-sector technology level.
    pub gamma: f64,
    /// Physical-capital decay rate.
    pub pi: f64,
    /// Human-capital externality.
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialEndowment {
    pub k0: f64,
    pub h0: f64,
}

impl InitialEndowment {
    pub fn new(k0: f64, h0: f64) -> Result<Self, Error> {
        if !(k0.is_finite() && k0 > 0.0 && h0.is_finite() && h0 > 0.0) {
            return Err(Error::InvalidEndowment { k0, h0 });
        }
        Ok(Self { k0, h0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub eta: f64,
    pub phi: f64,
    pub chi: f64,
    pub xi: f64,
    pub varphi: f64,
    /// Linear rate of the z-ratio dynamics, `delta*eta + varphi + pi`.
    pub a: f64,
    pub z_star: f64,
    pub u_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    NonFinite,
    BetaOutOfRange,
    SigmaNonPositive,
    SigmaEqualsOne,
    SigmaEqualsBeta,
    RhoNonPositive,
    DeltaNonPositive,
    GammaNonPositive,
    PiNegative,
    ThetaNegative,
    XiNonPositive,
    XiNotAboveVarphi,
    UStarNotBelowOne,
    TransversalityDecay,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::NonFinite => "parameter not finite",
            Rule::BetaOutOfRange => "beta out of (0,1)",
            Rule::SigmaNonPositive => "sigma not positive",
            Rule::SigmaEqualsOne => "sigma equals 1",
            Rule::SigmaEqualsBeta => "sigma equals beta",
            Rule::RhoNonPositive => "rho not positive",
            Rule::DeltaNonPositive => "delta not positive",
            Rule::GammaNonPositive => "gamma not positive",
            Rule::PiNegative => "pi negative",
            Rule::ThetaNegative => "theta negative",
            Rule::XiNonPositive => "xi<=0",
            Rule::XiNotAboveVarphi => "xi<=varphi",
            Rule::UStarNotBelowOne => "xi-varphi>=delta*eta",
            Rule::TransversalityDecay => "rho<=(1-sigma)*chi",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn contains(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, rule: Rule, severity: Severity, message: String) {
        self.violations.push(Violation {
            rule,
            severity,
            message,
        });
    }
}

fn raw_constants(p: &ModelParams) -> DerivedConstants {
    let ModelParams {
        beta,
        sigma,
        rho,
        delta,
        gamma,
        pi,
        theta,
    } = *p;
    let one_b = 1.0 - beta;
    let eta = (one_b + theta) / one_b;
    let phi = (one_b * (delta + pi * one_b) + theta * delta) / (beta * one_b);
    let chi = (one_b * (delta - rho) + theta * delta) / (sigma * one_b);
    let xi = phi - chi;
    let varphi = ((delta + pi) * one_b + theta * delta) / beta;
    let a = delta * eta + varphi + pi;
    let z_star = (a / gamma).powf(1.0 / one_b);
    let u_star = (xi - varphi) / (delta * eta);
    DerivedConstants {
        eta,
        phi,
        chi,
        xi,
        varphi,
        a,
        z_star,
        u_star,
    }
}

/// Check every parameter invariant plus the feasibility of the saddle-path
/// integrals. The transversality-decay condition is reported as a warning.
pub fn validate(p: &ModelParams) -> ValidationReport {
    use Severity::{Error as E, Warning as W};
    let mut report = ValidationReport::default();
    let all = [
        ("beta", p.beta),
        ("sigma", p.sigma),
        ("rho", p.rho),
        ("delta", p.delta),
        ("gamma", p.gamma),
        ("pi", p.pi),
        ("theta", p.theta),
    ];
    let bad: Vec<&str> = all.iter().filter(|(_, v)| !v.is_finite()).map(|(n, _)| *n).collect();
    if !bad.is_empty() {
        report.push(Rule::NonFinite, E, format!("non-finite parameters: {}", bad.join(", ")));
        return report;
    }
    if !(p.beta > 0.0 && p.beta < 1.0) {
        report.push(Rule::BetaOutOfRange, E, format!("beta = {} must lie in (0,1)", p.beta));
    }
    if p.sigma <= 0.0 {
        report.push(Rule::SigmaNonPositive, E, format!("sigma = {} must be > 0", p.sigma));
    }
    if p.sigma == 1.0 {
        report.push(Rule::SigmaEqualsOne, E, "sigma must differ from 1".to_string());
    }
    if p.sigma == p.beta {
        report.push(Rule::SigmaEqualsBeta, E, format!("sigma = beta = {}", p.sigma));
    }
    if p.rho <= 0.0 {
        report.push(Rule::RhoNonPositive, E, format!("rho = {} must be > 0", p.rho));
    }
    if p.delta <= 0.0 {
        report.push(Rule::DeltaNonPositive, E, format!("delta = {} must be > 0", p.delta));
    }
    if p.gamma <= 0.0 {
        report.push(Rule::GammaNonPositive, E, format!("gamma = {} must be > 0", p.gamma));
    }
    if p.pi < 0.0 {
        report.push(Rule::PiNegative, E, format!("pi = {} must be >= 0", p.pi));
    }
    if p.theta < 0.0 {
        report.push(Rule::ThetaNegative, E, format!("theta = {} must be >= 0", p.theta));
    }
    if report.has_errors() {
        return report;
    }

    let c = raw_constants(p);
    if c.xi <= 0.0 {
        report.push(Rule::XiNonPositive, E, format!("xi = {} must be > 0", c.xi));
    }
    if c.xi <= c.varphi {
        report.push(
            Rule::XiNotAboveVarphi,
            E,
            format!("xi = {} must exceed varphi = {}", c.xi, c.varphi),
        );
    }
    if c.xi - c.varphi >= p.delta * c.eta {
        report.push(
            Rule::UStarNotBelowOne,
            E,
            format!("steady-state control u* = {} must be < 1", c.u_star),
        );
    }
    if p.rho <= (1.0 - p.sigma) * c.chi {
        report.push(
            Rule::TransversalityDecay,
            W,
            format!(
                "rho = {} does not exceed (1-sigma)*chi = {}",
                p.rho,
                (1.0 - p.sigma) * c.chi
            ),
        );
    }
    report
}

/// Derived rates and steady-state values. Rejects parameters with any
/// hard validation error.
pub fn derive_constants(p: &ModelParams) -> Result<DerivedConstants, Error> {
    let report = validate(p);
    if report.has_errors() {
        return Err(Error::InvalidParams(report));
    }
    Ok(raw_constants(p))
}

/// Validated parameters bundled with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    pub params: ModelParams,
    pub constants: DerivedConstants,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self, Error> {
        let constants = derive_constants(&params)?;
        Ok(Self { params, constants })
    }

    /// `delta * eta`, the coefficient of `u` in the control equation.
    pub fn delta_eta(&self) -> f64 {
        self.params.delta * self.constants.eta
    }

    /// Exponent `(sigma - beta) / sigma` of z in the F and B integrands.
    pub fn integrand_power(&self) -> f64 {
        (self.params.sigma - self.params.beta) / self.params.sigma
    }
}
