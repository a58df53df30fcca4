//! Closed-form solution of the optimality system.
//!
//! The composite ratio `z = h^eta * u / k` obeys the autonomous equation
//! `z' = a z - gamma z^(2-beta)`: in `z'/z = eta h'/h + u'/u - k'/k` the
//! consumption ratio `c/k` and the control `u` both cancel. With
//! `w = z^(beta-1)` this becomes linear, `w' = (1-beta)(gamma - a w)`, so
//!
//! ```text
//! z(t)^(beta-1) = gamma/a + (z0^(beta-1) - gamma/a) exp(-(1-beta) a t)
//! ```
//!
//! Every other trajectory is built from `z(t)` and the discounted integrals
//! `F(t) = int_0^t z^p e^(-xi s) ds` and `B(t) = int_0^t z^p e^(-(xi-varphi) s) ds`
//! with `p = (sigma-beta)/sigma`.
//!
//! The remaining integrals `F* - F(t)` and `B* - B(t)` are evaluated directly
//! as tails `int_t^inf`, never by subtracting two nearly equal numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{try_adaptive_quadrature, QuadratureResult, ToleranceSettings};
use crate::params::{InitialEndowment, Model};

/// Relative distance of `z^(beta-1)` from its limit beyond which the
/// integrands are replaced by their steady-state value.
const SETTLE_TOL: f64 = 1e-12;

/// Closed-form path of the composite ratio z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZPath {
    pub z0: f64,
    /// Limit of `z^(beta-1)`, equal to `gamma / a`.
    pub w_inf: f64,
    /// `z0^(beta-1)`.
    pub w0: f64,
    /// Convergence rate `(1-beta) a` of `z^(beta-1)`.
    pub decay_rate: f64,
    beta: f64,
}

impl ZPath {
    pub fn new(model: &Model, z0: f64) -> Self {
        let beta = model.params.beta;
        Self {
            z0,
            w_inf: model.params.gamma / model.constants.a,
            w0: z0.powf(beta - 1.0),
            decay_rate: (1.0 - beta) * model.constants.a,
            beta,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.z0;
        }
        self.w_at(t).powf(1.0 / (self.beta - 1.0))
    }

    /// `z(t)^(beta-1)`.
    pub fn w_at(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.w0;
        }
        self.w_inf + (self.w0 - self.w_inf) * (-self.decay_rate * t).exp()
    }

    /// Smallest T with `|z(T)^(beta-1) - gamma/a| <= 1e-12 gamma/a`.
    pub fn settle_time(&self) -> f64 {
        let gap = (self.w0 - self.w_inf).abs();
        if gap <= SETTLE_TOL * self.w_inf {
            0.0
        } else {
            (gap / (SETTLE_TOL * self.w_inf)).ln() / self.decay_rate
        }
    }
}

pub fn z_at(model: &Model, z0: f64, t: f64) -> f64 {
    ZPath::new(model, z0).at(t)
}

/// Saddle-path initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub u0: f64,
    pub c0: f64,
    pub z0: f64,
    pub f_star: f64,
    pub b_star: f64,
    pub lambda0: f64,
    pub mu0: f64,
}

impl Calibration {
    /// `(varphi + delta eta u0) F* - delta eta u0 B*`, zero on the saddle path.
    pub fn jump_gap(&self, model: &Model) -> f64 {
        let de = model.delta_eta();
        (model.constants.varphi + de * self.u0) * self.f_star - de * self.u0 * self.b_star
    }
}

fn integrand(model: &Model, path: &ZPath, rate: f64, s: f64) -> f64 {
    path.at(s).powf(model.integrand_power()) * (-rate * s).exp()
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 {
        Ok(())
    } else {
        Err(Error::DivergentIntegral { rate })
    }
}

/// `int_t^inf z(s)^p e^(-rate s) ds`: quadrature up to the settling time of
/// z, then the exact tail of the steady-state integrand.
fn discounted_tail(model: &Model, z0: f64, rate: f64, t: f64, tol: &ToleranceSettings) -> Result<f64> {
    check_rate(rate)?;
    let path = ZPath::new(model, z0);
    let settle = path.settle_time();
    let steady = model.constants.z_star.powf(model.integrand_power());
    if t >= settle {
        return Ok(steady * (-rate * t).exp() / rate);
    }
    let body = try_adaptive_quadrature(
        |s| Ok::<f64, Error>(integrand(model, &path, rate, s)),
        t,
        settle,
        tol.quad_tol,
    )?;
    Ok(body.value + steady * (-rate * settle).exp() / rate)
}

fn discounted_integral(model: &Model, z0: f64, rate: f64, t: f64, tol: &ToleranceSettings) -> Result<f64> {
    let path = ZPath::new(model, z0);
    let r = try_adaptive_quadrature(
        |s| Ok::<f64, Error>(integrand(model, &path, rate, s)),
        0.0,
        t,
        tol.quad_tol,
    )?;
    Ok(r.value)
}

fn b_rate(model: &Model) -> f64 {
    model.constants.xi - model.constants.varphi
}

/// `F(t)` by direct quadrature over `[0, t]`.
pub fn f_at(model: &Model, z0: f64, t: f64, tol: &ToleranceSettings) -> Result<f64> {
    discounted_integral(model, z0, model.constants.xi, t, tol)
}

/// `B(t)` by direct quadrature over `[0, t]`.
pub fn b_at(model: &Model, z0: f64, t: f64, tol: &ToleranceSettings) -> Result<f64> {
    discounted_integral(model, z0, b_rate(model), t, tol)
}

pub fn f_star(model: &Model, z0: f64, tol: &ToleranceSettings) -> Result<f64> {
    discounted_tail(model, z0, model.constants.xi, 0.0, tol)
}

pub fn b_star(model: &Model, z0: f64, tol: &ToleranceSettings) -> Result<f64> {
    discounted_tail(model, z0, b_rate(model), 0.0, tol)
}

/// `F* - F(t)`, evaluated as the tail integral from t.
pub fn f_remaining(model: &Model, z0: f64, t: f64, tol: &ToleranceSettings) -> Result<f64> {
    discounted_tail(model, z0, model.constants.xi, t, tol)
}

/// `B* - B(t)`, evaluated as the tail integral from t.
pub fn b_remaining(model: &Model, z0: f64, t: f64, tol: &ToleranceSettings) -> Result<f64> {
    discounted_tail(model, z0, b_rate(model), t, tol)
}

/// Physical capital from precomputed `z(t)` and `F* - F(t)`.
pub fn k_from(model: &Model, cal: &Calibration, endow: &InitialEndowment, t: f64, z: f64, f_rem: f64) -> f64 {
    endow.k0 * cal.z0 / cal.f_star / z * f_rem * (model.constants.phi * t).exp()
}

pub fn k_at(
    model: &Model,
    cal: &Calibration,
    endow: &InitialEndowment,
    t: f64,
    tol: &ToleranceSettings,
) -> Result<f64> {
    let z = z_at(model, cal.z0, t);
    let f_rem = f_remaining(model, cal.z0, t, tol)?;
    Ok(k_from(model, cal, endow, t, z, f_rem))
}

/// Consumption; depends on time only through z.
pub fn c_at(model: &Model, cal: &Calibration, endow: &InitialEndowment, t: f64) -> f64 {
    let z = z_at(model, cal.z0, t);
    let p = &model.params;
    endow.k0 * cal.z0 / cal.f_star * z.powf(-p.beta / p.sigma) * (model.constants.chi * t).exp()
}

/// Initial consumption implied by the consumption closed form at t = 0.
pub fn initial_consumption(model: &Model, endow: &InitialEndowment, z0: f64, f_star: f64) -> f64 {
    let p = &model.params;
    endow.k0 * z0 / f_star * z0.powf(-p.beta / p.sigma)
}

/// First-set control from precomputed `F* - F(t)` and `B* - B(t)`.
///
/// The bracket `(varphi + de u0) F* - de u0 B(t)` is formed as the jump gap
/// plus `de u0 (B* - B(t))`, which is the same quantity without the
/// cancellation.
pub fn u_form1_from(model: &Model, cal: &Calibration, t: f64, f_rem: f64, b_rem: f64) -> Result<f64> {
    let varphi = model.constants.varphi;
    let de_u0 = model.delta_eta() * cal.u0;
    let bracket = cal.jump_gap(model) + de_u0 * b_rem;
    let numer = varphi * cal.u0 * f_rem;
    let denom = bracket * (-varphi * t).exp() - de_u0 * f_rem;
    let u = numer / denom;
    if denom == 0.0 || !u.is_finite() {
        return Err(Error::VanishingDenominator {
            what: "first-set control",
            t,
        });
    }
    Ok(u)
}

pub fn u_form1_at(model: &Model, cal: &Calibration, t: f64, tol: &ToleranceSettings) -> Result<f64> {
    let f_rem = f_remaining(model, cal.z0, t, tol)?;
    let b_rem = b_remaining(model, cal.z0, t, tol)?;
    u_form1_from(model, cal, t, f_rem, b_rem)
}

/// Second-set control from precomputed `z(t)` and `F* - F(t)`.
pub fn u_form2_from(
    model: &Model,
    cal: &Calibration,
    endow: &InitialEndowment,
    t: f64,
    z: f64,
    f_rem: f64,
) -> Result<f64> {
    let p = &model.params;
    let (beta, sigma) = (p.beta, p.sigma);
    let drift = p.rho + p.pi - p.pi * sigma;
    let gbs = p.gamma * beta * (1.0 - sigma);
    let k0 = endow.k0;
    let lead = cal.z0.powf(beta - 1.0) * (sigma * cal.c0 - drift * k0) + gbs * k0;
    let numer = cal.u0 / k0 * lead * f_rem;
    let denom = (gbs - drift * z.powf(beta - 1.0)) * f_rem
        + sigma * z.powf(beta - beta / sigma) * (-model.constants.xi * t).exp();
    let u = numer / denom;
    if denom == 0.0 || !u.is_finite() {
        return Err(Error::VanishingDenominator {
            what: "second-set control",
            t,
        });
    }
    Ok(u)
}

pub fn u_form2_at(
    model: &Model,
    cal: &Calibration,
    endow: &InitialEndowment,
    t: f64,
    tol: &ToleranceSettings,
) -> Result<f64> {
    let z = z_at(model, cal.z0, t);
    let f_rem = f_remaining(model, cal.z0, t, tol)?;
    u_form2_from(model, cal, endow, t, z, f_rem)
}

/// Human capital from precomputed `F* - F(t)` and a control value taken from
/// either control form.
pub fn h_from(model: &Model, cal: &Calibration, endow: &InitialEndowment, t: f64, f_rem: f64, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::NonPositiveState {
            component: "u",
            value: u,
            t,
        });
    }
    let base = cal.u0 * (model.constants.phi * t).exp() * f_rem / (cal.f_star * u);
    if !(base > 0.0) {
        return Err(Error::NonPositiveState {
            component: "h base",
            value: base,
            t,
        });
    }
    Ok(endow.h0 * base.powf(1.0 / model.constants.eta))
}

pub fn h_at(
    model: &Model,
    cal: &Calibration,
    endow: &InitialEndowment,
    t: f64,
    u_value: f64,
    tol: &ToleranceSettings,
) -> Result<f64> {
    let f_rem = f_remaining(model, cal.z0, t, tol)?;
    h_from(model, cal, endow, t, f_rem, u_value)
}

/// Shadow prices from the stationarity conditions of the Hamiltonian:
/// `lambda = c^(-sigma)` and
/// `mu = (1-beta) gamma z^(1-beta) k lambda / (delta h u)`.
pub fn costates_at(model: &Model, k: f64, h: f64, c: f64, u: f64) -> Result<(f64, f64)> {
    for (component, value) in [("k", k), ("h", h), ("c", c), ("u", u)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveState {
                component,
                value,
                t: f64::NAN,
            });
        }
    }
    let p = &model.params;
    let lambda = c.powf(-p.sigma);
    let z = h.powf(model.constants.eta) * u / k;
    let mu = (1.0 - p.beta) * p.gamma * z.powf(1.0 - p.beta) * k * lambda / (p.delta * h * u);
    Ok((lambda, mu))
}

/// `int_0^inf (c^(1-sigma) - 1)/(1-sigma) e^(-rho t) dt` for a consumption
/// path that equals `tail_c0 * exp(tail_growth * t)` from `t_split` on.
pub fn discounted_utility<C>(
    sigma: f64,
    rho: f64,
    mut consumption: C,
    tail_c0: f64,
    tail_growth: f64,
    t_split: f64,
    tol: &ToleranceSettings,
) -> Result<QuadratureResult>
where
    C: FnMut(f64) -> f64,
{
    let tail_rate = rho - (1.0 - sigma) * tail_growth;
    if !(rho > 0.0 && tail_rate > 0.0) {
        return Err(Error::DivergentWelfare { rate: tail_rate });
    }
    let one_s = 1.0 - sigma;
    let body = try_adaptive_quadrature(
        |t| Ok::<f64, Error>((consumption(t).powf(one_s) - 1.0) / one_s * (-rho * t).exp()),
        0.0,
        t_split,
        tol.quad_tol,
    )?;
    let tail = (tail_c0.powf(one_s) * (-tail_rate * t_split).exp() / tail_rate - (-rho * t_split).exp() / rho) / one_s;
    Ok(QuadratureResult {
        value: body.value + tail,
        ..body
    })
}

/// Lifetime utility along the closed-form consumption path.
pub fn welfare(
    model: &Model,
    cal: &Calibration,
    endow: &InitialEndowment,
    tol: &ToleranceSettings,
) -> Result<QuadratureResult> {
    let p = &model.params;
    let path = ZPath::new(model, cal.z0);
    let scale = endow.k0 * cal.z0 / cal.f_star;
    let tail_c0 = scale * model.constants.z_star.powf(-p.beta / p.sigma);
    discounted_utility(
        p.sigma,
        p.rho,
        |t| scale * path.at(t).powf(-p.beta / p.sigma) * (model.constants.chi * t).exp(),
        tail_c0,
        model.constants.chi,
        path.settle_time(),
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_ode;
    use crate::params::fixtures::{p1, p2};
    use crate::params::ModelParams;
    use proptest::prelude::*;

    fn tol() -> ToleranceSettings {
        ToleranceSettings::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// P1 balanced-growth calibration written out by hand.
    fn p1_bgp() -> (Model, Calibration, InitialEndowment) {
        let model = Model::new(p1()).unwrap();
        let c0: f64 = 0.095;
        let lambda0 = c0.powf(-2.0);
        (
            model,
            Calibration {
                u0: 0.9,
                c0,
                z0: 1.0,
                f_star: 1.0 / 0.095,
                b_star: 1.0 / 0.045,
                lambda0,
                mu0: lambda0,
            },
            InitialEndowment {
                k0: 1.0,
                h0: 10.0 / 9.0,
            },
        )
    }

    #[test]
    fn z_fixed_point_and_initial_value() {
        let m = Model::new(p1()).unwrap();
        for t in [0.0, 1.0, 50.0, 500.0] {
            assert!((z_at(&m, 1.0, t) - 1.0).abs() < 1e-15);
        }
        assert_eq!(z_at(&m, 2.0, 0.0), 2.0);
    }

    #[test]
    fn z_bernoulli_value_matches_integration() {
        let m = Model::new(p1()).unwrap();
        // w(20) = 1 + (2^-0.5 - 1) e^-1, z = w^-2.
        let z20 = z_at(&m, 2.0, 20.0);
        assert!((z20 - 1.256_106_018_476_026).abs() < 1e-13);
        let t = ToleranceSettings {
            ode_rel_tol: 1e-12,
            ode_abs_tol: 1e-14,
            ..tol()
        };
        let traj = integrate_ode(
            |_, y, dy| dy[0] = 0.1 * y[0] - 0.1 * y[0].powf(1.5),
            &[2.0],
            0.0,
            20.0,
            &t,
        )
        .unwrap();
        assert!(rel(traj.last_state()[0], z20) < 1e-10);
    }

    #[test]
    fn settle_time_rule() {
        let m = Model::new(p1()).unwrap();
        let path = ZPath::new(&m, 2.0);
        let tm = path.settle_time();
        let w = path.w_at(tm);
        assert!((w - path.w_inf).abs() <= 1.0000001e-12 * path.w_inf);
        assert_eq!(ZPath::new(&m, 1.0).settle_time(), 0.0);
    }

    #[test]
    fn integrals_on_constant_integrand() {
        let m = Model::new(p1()).unwrap();
        assert_eq!(f_at(&m, 1.0, 0.0, &tol()).unwrap(), 0.0);
        assert_eq!(b_at(&m, 1.0, 0.0, &tol()).unwrap(), 0.0);
        let f10 = f_at(&m, 1.0, 10.0, &tol()).unwrap();
        let b10 = b_at(&m, 1.0, 10.0, &tol()).unwrap();
        assert!(rel(f10, (1.0 - (-0.95f64).exp()) / 0.095) < 1e-12);
        assert!((f10 - 6.455_357_647_847_356).abs() < 1e-10);
        assert!(rel(b10, (1.0 - (-0.45f64).exp()) / 0.045) < 1e-12);
        assert!((b10 - 8.052_707_741_738_37).abs() < 1e-10);
        assert!(rel(f_star(&m, 1.0, &tol()).unwrap(), 1.0 / 0.095) < 1e-13);
        assert!(rel(b_star(&m, 1.0, &tol()).unwrap(), 1.0 / 0.045) < 1e-13);
    }

    #[test]
    fn divergent_b_star_is_an_error() {
        // Bypass validation to reach the rate guard directly.
        let mut m = Model::new(p1()).unwrap();
        m.constants.varphi = m.constants.xi + 0.01;
        assert!(matches!(b_star(&m, 1.0, &tol()), Err(Error::DivergentIntegral { .. })));
    }

    #[test]
    fn remaining_plus_partial_equals_total() {
        let m = Model::new(p2()).unwrap();
        let z0 = 0.4;
        let fs = f_star(&m, z0, &tol()).unwrap();
        let bs = b_star(&m, z0, &tol()).unwrap();
        for t in [0.5, 3.0, 20.0, 80.0] {
            let f = f_at(&m, z0, t, &tol()).unwrap();
            let fr = f_remaining(&m, z0, t, &tol()).unwrap();
            assert!(rel(f + fr, fs) < 1e-11, "t = {t}");
            let b = b_at(&m, z0, t, &tol()).unwrap();
            let br = b_remaining(&m, z0, t, &tol()).unwrap();
            assert!(rel(b + br, bs) < 1e-11, "t = {t}");
            assert!(f <= fs);
        }
    }

    #[test]
    fn bgp_trajectories() {
        let (m, cal, e) = p1_bgp();
        let t = tol();
        assert!(rel(k_at(&m, &cal, &e, 0.0, &t).unwrap(), 1.0) < 1e-14);
        let k100 = k_at(&m, &cal, &e, 100.0, &t).unwrap();
        assert!(rel(k100, 1.648_721_270_700_128) < 1e-10);
        assert!(rel(c_at(&m, &cal, &e, 0.0), 0.095) < 1e-14);
        assert!(rel(c_at(&m, &cal, &e, 40.0), 0.095 * 0.2f64.exp()) < 1e-13);
        for time in [0.0, 10.0, 75.0, 200.0] {
            let u1 = u_form1_at(&m, &cal, time, &t).unwrap();
            let u2 = u_form2_at(&m, &cal, &e, time, &t).unwrap();
            assert!((u1 - 0.9).abs() < 1e-10, "u1({time}) = {u1}");
            assert!((u2 - 0.9).abs() < 1e-10, "u2({time}) = {u2}");
            let h = h_at(&m, &cal, &e, time, u1, &t).unwrap();
            assert!(rel(h, 10.0 / 9.0 * (0.005 * time).exp()) < 1e-9);
        }
    }

    #[test]
    fn second_form_at_zero_on_bgp() {
        let (m, cal, e) = p1_bgp();
        // Numerator brace 0.10 * F* * 0.9; denominator -0.09 F* + 2.
        let u2 = u_form2_at(&m, &cal, &e, 0.0, &tol()).unwrap();
        assert!((u2 - 0.9).abs() < 1e-14);
    }

    #[test]
    fn h_rejects_non_positive_control() {
        let (m, cal, e) = p1_bgp();
        assert!(matches!(
            h_at(&m, &cal, &e, 1.0, 0.0, &tol()),
            Err(Error::NonPositiveState { .. })
        ));
    }

    #[test]
    fn costates_on_bgp() {
        let (m, _, _) = p1_bgp();
        let (lambda, mu) = costates_at(&m, 1.0, 10.0 / 9.0, 0.095, 0.9).unwrap();
        assert!((lambda - 110.803_324_099_723).abs() < 1e-9);
        assert!((mu - 110.803_324_099_723).abs() < 1e-9);
        let (lambda2, _) = costates_at(&m, 1.0, 10.0 / 9.0, 0.19, 0.9).unwrap();
        assert!(rel(lambda / lambda2, 2f64.powf(2.0)) < 1e-14);
        assert!(costates_at(&m, 1.0, -1.0, 0.1, 0.5).is_err());
    }

    #[test]
    fn bgp_welfare() {
        let (m, cal, e) = p1_bgp();
        let v = welfare(&m, &cal, &e, &tol()).unwrap();
        assert!((v.value - (25.0 - (1.0 / 0.095) / 0.045)).abs() < 1e-9, "{}", v.value);
    }

    #[test]
    fn welfare_of_unit_consumption_is_zero() {
        let v = discounted_utility(2.0, 0.04, |_| 1.0, 1.0, 0.0, 30.0, &tol()).unwrap();
        assert!(v.value.abs() < 1e-13);
    }

    #[test]
    fn welfare_of_constant_consumption() {
        for sigma in [0.5, 1.5, 3.0] {
            let c: f64 = 0.7;
            let v = discounted_utility(sigma, 0.05, |_| c, c, 0.0, 12.0, &tol()).unwrap();
            let exact = (c.powf(1.0 - sigma) - 1.0) / ((1.0 - sigma) * 0.05);
            assert!(rel(v.value, exact) < 1e-12, "sigma = {sigma}");
        }
    }

    #[test]
    fn welfare_divergence_detected() {
        assert!(matches!(
            discounted_utility(0.5, 0.01, |_| 1.0, 1.0, 0.1, 0.0, &tol()),
            Err(Error::DivergentWelfare { .. })
        ));
    }

    fn feasible_params() -> impl Strategy<Value = ModelParams> {
        (
            0.2f64..0.7,
            1.2f64..3.5,
            0.01f64..0.06,
            0.03f64..0.12,
            0.05f64..0.4,
            0.0f64..0.03,
            0.0f64..0.2,
        )
            .prop_map(|(beta, sigma, rho, delta, gamma, pi, theta)| ModelParams {
                beta,
                sigma,
                rho,
                delta,
                gamma,
                pi,
                theta,
            })
            .prop_filter("feasible", |p| Model::new(*p).is_ok())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn z_converges_monotonically(p in feasible_params(), ratio in 0.2f64..5.0) {
            let m = Model::new(p).unwrap();
            let z0 = m.constants.z_star * ratio;
            let mut prev = (z0 - m.constants.z_star).abs();
            for j in 1..=40 {
                let z = z_at(&m, z0, 5.0 * j as f64);
                prop_assert!(z > 0.0);
                let gap = (z - m.constants.z_star).abs();
                prop_assert!(gap <= prev * (1.0 + 1e-12) + 1e-13 * m.constants.z_star);
                prev = gap;
            }
        }

        #[test]
        fn z_identity_holds_along_first_form(p in feasible_params(), u0 in 0.1f64..0.95, k0 in 0.3f64..3.0) {
            // Any (u0, z0) pair with its own F*, B* gives a consistent path as
            // long as the control stays positive; the identity is algebraic.
            let m = Model::new(p).unwrap();
            let e = InitialEndowment { k0, h0: 1.0 };
            let t = tol();
            let z0 = e.h0.powf(m.constants.eta) * u0 / k0;
            let fs = f_star(&m, z0, &t).unwrap();
            let bs = b_star(&m, z0, &t).unwrap();
            let cal = Calibration { u0, c0: initial_consumption(&m, &e, z0, fs), z0, f_star: fs, b_star: bs, lambda0: 1.0, mu0: 1.0 };
            for time in [0.0, 0.7, 4.0, 12.0] {
                let z = z_at(&m, z0, time);
                let f_rem = f_remaining(&m, z0, time, &t).unwrap();
                let b_rem = b_remaining(&m, z0, time, &t).unwrap();
                let Ok(u) = u_form1_from(&m, &cal, time, f_rem, b_rem) else { continue };
                if !(u > 0.0) { continue; }
                let k = k_from(&m, &cal, &e, time, z, f_rem);
                let h = h_from(&m, &cal, &e, time, f_rem, u).unwrap();
                let zz = h.powf(m.constants.eta) * u / k;
                prop_assert!((zz - z).abs() <= 1e-8 * z, "t={} z={} recon={}", time, z, zz);
            }
        }
    }
}
