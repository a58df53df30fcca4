//! Numerical checks of the calibrated solution: agreement of the two control
//! formulas, uniqueness of the control path, admissibility, transversality,
//! residuals of the optimality system, long-run limits and agreement with a
//! direct simulation.
//!
//! Every check is a pure function of the solution and its settings. Checks
//! that rely on forward integration use a tolerance that widens with t.

use serde::Serialize;

use crate::calibration::SolutionPath;
use crate::dynamics::{foc_rhs, scalar_u_rhs, simulate_foc, simulate_scalar_u_from, StateVector, COMPONENTS};
use crate::error::{Error, Result};
use crate::numerics::try_integrate_ode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationSettings {
    /// Flat relative tolerance between the two control formulas.
    pub equiv_tol: f64,
    /// Spacing of the closed-form evaluation grids.
    pub grid_step: f64,
    /// Horizon for the closed-form checks (equivalence, admissibility,
    /// residuals, transversality).
    pub horizon: f64,
    /// Horizon for the checks driven by forward integration.
    pub compare_horizon: f64,
    /// Spacing of the transversality samples.
    pub transversality_step: f64,
    pub fd_step: f64,
    pub bgp_horizon: f64,
    pub bgp_tol: f64,
    /// Base of the widening schedule `base * (1 + t / 10)`.
    pub schedule_base: f64,
    /// Offset of the initial control for the perturbation probe.
    pub perturbation: f64,
}

impl Default for VerificationSettings {
    fn default() -> Self {
        Self {
            equiv_tol: 1e-5,
            grid_step: 0.5,
            horizon: 200.0,
            compare_horizon: 50.0,
            transversality_step: 1.0,
            fd_step: 1e-4,
            bgp_horizon: 400.0,
            bgp_tol: 1e-4,
            schedule_base: 1e-6,
            perturbation: 1e-3,
        }
    }
}

impl VerificationSettings {
    pub fn schedule(&self, t: f64) -> f64 {
        self.schedule_base * (1.0 + t / 10.0)
    }
}

/// `0, step, 2 step, ...` up to and including `horizon`.
pub fn uniform_grid(horizon: f64, step: f64) -> Vec<f64> {
    if !(horizon > 0.0) || !(step > 0.0) {
        return Vec::new();
    }
    let n = (horizon / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    if horizon - grid[n] > 1e-9 * step {
        grid.push(horizon);
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSample {
    pub t: f64,
    pub gap: f64,
}

/// Largest value of a series and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupNorm {
    pub max: f64,
    pub at: f64,
}

fn sup_norm(series: impl IntoIterator<Item = (f64, f64)>) -> Option<SupNorm> {
    let mut best: Option<SupNorm> = None;
    for (t, v) in series {
        if best.is_none_or(|b| v > b.max || v.is_nan()) {
            best = Some(SupNorm { max: v, at: t });
            if v.is_nan() {
                break;
            }
        }
    }
    best
}

fn rel_gap(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Coincide,
    Discrepant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceCheck {
    pub verdict: Verdict,
    pub agreement: Option<Agreement>,
    pub tol: f64,
    pub points: usize,
    pub sup: Option<SupNorm>,
    pub gap_at_zero: Option<f64>,
    #[serde(skip)]
    pub series: Vec<GapSample>,
}

/// Relative gap `|u1 - u2| / u1` between the two control formulas on `grid`.
pub fn check_equivalence_u_forms(sol: &SolutionPath, grid: &[f64], equiv_tol: f64) -> Result<EquivalenceCheck> {
    let mut series = Vec::with_capacity(grid.len());
    for &t in grid {
        let u1 = sol.u_form1(t)?;
        let u2 = sol.u_form2(t)?;
        series.push(GapSample {
            t,
            gap: rel_gap(u2, u1),
        });
    }
    let sup = sup_norm(series.iter().map(|s| (s.t, s.gap)));
    let gap_at_zero = series.first().filter(|s| s.t == 0.0).map(|s| s.gap);
    let (verdict, agreement) = match sup {
        None => (Verdict::Informational, None),
        Some(s) if s.max <= equiv_tol => (Verdict::Pass, Some(Agreement::Coincide)),
        Some(_) => (Verdict::Fail, Some(Agreement::Discrepant)),
    };
    Ok(EquivalenceCheck {
        verdict,
        agreement,
        tol: equiv_tol,
        points: series.len(),
        sup,
        gap_at_zero,
        series,
    })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationProbe {
    pub verdict: Verdict,
    pub u_init: f64,
    /// Relative gap to the first-set control at the end of the run, or the
    /// reason the perturbed path could not be continued.
    pub final_gap: Option<f64>,
    pub stopped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCheck {
    pub verdict: Verdict,
    pub horizon: f64,
    pub sup: SupNorm,
    /// Largest ratio of the gap to the tolerance schedule; at most 1 on pass.
    pub worst_schedule_ratio: f64,
    pub steps: usize,
    pub perturbation: PerturbationProbe,
}

/// Integrate the scalar control equation from the calibrated control and
/// compare it with the first-set formula on its own step points and `grid`.
pub fn check_uniqueness_ode(
    sol: &SolutionPath,
    grid: &[f64],
    settings: &VerificationSettings,
) -> Result<UniquenessCheck> {
    let horizon = settings.compare_horizon;
    let traj = simulate_scalar_u_from(&sol.model, &sol.calibration, sol.calibration.u0, horizon, &sol.tol)?;
    let mut times: Vec<f64> = traj.times().to_vec();
    times.extend(grid.iter().copied().filter(|&t| t <= horizon));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut gaps = Vec::with_capacity(times.len());
    for &t in &times {
        let u_ode = traj.eval_component(t, 0)?;
        gaps.push((t, rel_gap(u_ode, sol.u_form1(t)?)));
    }
    let sup = sup_norm(gaps.iter().copied()).unwrap_or(SupNorm { max: 0.0, at: 0.0 });
    let worst_schedule_ratio = gaps.iter().map(|&(t, g)| g / settings.schedule(t)).fold(0.0, f64::max);
    let perturbation = perturbation_probe(sol, horizon, settings.perturbation);
    Ok(UniquenessCheck {
        verdict: Verdict::from_bool(worst_schedule_ratio <= 1.0),
        horizon,
        sup,
        worst_schedule_ratio,
        steps: traj.len().saturating_sub(1),
        perturbation,
    })
}

fn perturbation_probe(sol: &SolutionPath, horizon: f64, offset: f64) -> PerturbationProbe {
    let u_init = sol.calibration.u0 + offset;
    let outcome = simulate_scalar_u_from(&sol.model, &sol.calibration, u_init, horizon, &sol.tol)
        .and_then(|traj| Ok(rel_gap(traj.last_state()[0], sol.u_form1(traj.t_end())?)));
    let (final_gap, stopped) = match outcome {
        Ok(g) => (Some(g), None),
        Err(err) => (None, Some(err.to_string())),
    };
    PerturbationProbe {
        verdict: Verdict::Informational,
        u_init,
        final_gap,
        stopped,
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
}

impl Range {
    fn observe(range: &mut Option<Range>, t: f64, v: f64) {
        match range {
            None => {
                *range = Some(Range {
                    min: v,
                    argmin: t,
                    max: v,
                    argmax: t,
                })
            }
            Some(r) => {
                if v < r.min {
                    r.min = v;
                    r.argmin = t;
                }
                if v > r.max {
                    r.max = v;
                    r.argmax = t;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityViolation {
    pub t: f64,
    pub form: &'static str,
    pub value: Option<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityCheck {
    pub verdict: Verdict,
    pub points: usize,
    pub form1: Option<Range>,
    pub form2: Option<Range>,
    pub violation_count: usize,
    /// The first few violations in time order.
    pub violations: Vec<AdmissibilityViolation>,
}

const MAX_LISTED_VIOLATIONS: usize = 10;

/// Both control formulas must stay strictly inside (0, 1) on `grid`. An
/// evaluator failure at a grid point counts as a violation there.
pub fn check_admissibility(sol: &SolutionPath, grid: &[f64]) -> AdmissibilityCheck {
    let mut form1 = None;
    let mut form2 = None;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    for &t in grid {
        for (form, value, range) in [
            ("u_form1", sol.u_form1(t), &mut form1),
            ("u_form2", sol.u_form2(t), &mut form2),
        ] {
            let violation = match value {
                Ok(u) if u > 0.0 && u < 1.0 => {
                    Range::observe(range, t, u);
                    None
                }
                Ok(u) => {
                    if u.is_finite() {
                        Range::observe(range, t, u);
                    }
                    Some((Some(u), "outside (0, 1)".to_string()))
                }
                Err(err) => Some((None, err.to_string())),
            };
            if let Some((value, reason)) = violation {
                violation_count += 1;
                if violations.len() < MAX_LISTED_VIOLATIONS {
                    violations.push(AdmissibilityViolation { t, form, value, reason });
                }
            }
        }
    }
    let verdict = if grid.is_empty() {
        Verdict::Informational
    } else {
        Verdict::from_bool(violation_count == 0)
    };
    AdmissibilityCheck {
        verdict,
        points: grid.len(),
        form1,
        form2,
        violation_count,
        violations,
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSeries {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    pub eventually_decreasing: bool,
    /// Least-squares slope of the log of the series over the fit window.
    pub log_slope: Option<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalityCheck {
    pub verdict: Verdict,
    pub samples: usize,
    pub fit_window: (f64, f64),
    /// `e^(-rho t) lambda k`.
    pub capital: TailSeries,
    /// `e^(-rho t) mu h`.
    pub human_capital: TailSeries,
    #[serde(skip)]
    pub times: Vec<f64>,
}

/// Largest multiple of the initial value still accepted at the last sample.
const TAIL_DECAY_FACTOR: f64 = 1e-3;

fn log_slope(times: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(sxy / sxx)
}

fn tail_series(times: &[f64], values: Vec<f64>, window: (f64, f64)) -> TailSeries {
    let start = times.iter().position(|&t| t >= window.0).unwrap_or(times.len());
    let tail = &values[start.min(values.len())..];
    let eventually_decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]);
    let (wt, wv): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (*t, *v))
        .unzip();
    TailSeries {
        initial: values.first().copied().unwrap_or(f64::NAN),
        last: values.last().copied().unwrap_or(f64::NAN),
        eventually_decreasing,
        log_slope: log_slope(&wt, &wv),
        values,
    }
}

/// Discounted value of both capital stocks at `sample_times`. The costate of
/// physical capital is `c^(-sigma)`; that of human capital is carried by its
/// own linear equation from `mu0` along the first-set control. The log-slope
/// is fitted from `fit_from` to the last sample.
pub fn check_transversality(sol: &SolutionPath, sample_times: &[f64], fit_from: f64) -> Result<TransversalityCheck> {
    let empty = || TailSeries {
        initial: f64::NAN,
        last: f64::NAN,
        eventually_decreasing: false,
        log_slope: None,
        values: Vec::new(),
    };
    let Some(&t_end) = sample_times.last() else {
        return Ok(TransversalityCheck {
            verdict: Verdict::Informational,
            samples: 0,
            fit_window: (fit_from, fit_from),
            capital: empty(),
            human_capital: empty(),
            times: Vec::new(),
        });
    };
    let p = &sol.model.params;
    let ext = p.theta * p.delta / (1.0 - p.beta);
    let mu_path = try_integrate_ode(
        |t, y: &[f64], dy: &mut [f64]| {
            dy[0] = (p.rho - p.delta - ext * sol.u_form1(t)?) * y[0];
            Ok::<(), Error>(())
        },
        &[sol.calibration.mu0],
        0.0,
        t_end.max(0.0),
        &sol.tol,
    )?;
    let mut capital = Vec::with_capacity(sample_times.len());
    let mut human = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        let disc = (-p.rho * t).exp();
        let lambda = sol.c(t).powf(-p.sigma);
        capital.push(disc * lambda * sol.k(t)?);
        human.push(disc * mu_path.eval_component(t, 0)? * sol.h(t)?);
    }
    let window = (fit_from, t_end);
    let capital = tail_series(sample_times, capital, window);
    let human_capital = tail_series(sample_times, human, window);
    let decays = |s: &TailSeries| s.eventually_decreasing && s.last < TAIL_DECAY_FACTOR * s.initial;
    Ok(TransversalityCheck {
        verdict: Verdict::from_bool(decays(&capital) && decays(&human_capital)),
        samples: sample_times.len(),
        fit_window: window,
        capital,
        human_capital,
        times: sample_times.to_vec(),
    })
}

// ---------------------------------------------------------------------------

/// Closed-form state with both human-capital compositions.
struct Sample {
    k: f64,
    h: f64,
    c: f64,
    u: f64,
    u2: f64,
    h2: f64,
}

fn sample(sol: &SolutionPath, t: f64) -> Result<Sample> {
    Ok(Sample {
        k: sol.k(t)?,
        h: sol.h(t)?,
        c: sol.c(t),
        u: sol.u_form1(t)?,
        u2: sol.u_form2(t)?,
        h2: sol.h_with(t, sol.u_form2(t)?)?,
    })
}

fn fd_derivative(f: impl Fn(&Sample) -> f64, s: &[Sample; 3], step: f64, one_sided: bool) -> f64 {
    if one_sided {
        (-3.0 * f(&s[0]) + 4.0 * f(&s[1]) - f(&s[2])) / (2.0 * step)
    } else {
        (f(&s[2]) - f(&s[0])) / (2.0 * step)
    }
}

/// Signed relative residuals of the optimality system along the closed
/// forms at time t: finite-difference derivative minus vector field, divided
/// by the state. Order: k, h, c, u, h composed with the second-set control,
/// and the scalar control equation.
pub fn foc_residuals_at(sol: &SolutionPath, t: f64, fd_step: f64) -> Result<[f64; 6]> {
    let one_sided = t - fd_step < 0.0;
    let offsets = if one_sided { [0.0, 1.0, 2.0] } else { [-1.0, 0.0, 1.0] };
    let s = [
        sample(sol, t + offsets[0] * fd_step)?,
        sample(sol, t + offsets[1] * fd_step)?,
        sample(sol, t + offsets[2] * fd_step)?,
    ];
    let here = if one_sided { &s[0] } else { &s[1] };
    // The costates do not enter the first four components.
    let state = StateVector {
        k: here.k,
        h: here.h,
        c: here.c,
        u: here.u,
        lambda: 1.0,
        mu: 1.0,
    };
    let rhs = foc_rhs(&sol.model, &state)?;
    let d = |f: fn(&Sample) -> f64| fd_derivative(f, &s, fd_step, one_sided);
    let dh2_rhs = sol.model.params.delta * (1.0 - here.u2) * here.h2;
    let du_scalar = scalar_u_rhs(&sol.model, &sol.calibration, t, here.u, &sol.tol)?;
    let du = d(|s| s.u);
    Ok([
        (d(|s| s.k) - rhs[0]) / here.k,
        (d(|s| s.h) - rhs[1]) / here.h,
        (d(|s| s.c) - rhs[2]) / here.c,
        (du - rhs[3]) / here.u,
        (d(|s| s.h2) - dh2_rhs) / here.h2,
        (du - du_scalar) / here.u,
    ])
}

pub const RESIDUAL_NAMES: [&str; 6] = ["k", "h", "c", "u", "h_form2", "u_scalar"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentResidual {
    pub component: &'static str,
    pub sup: Option<SupNorm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualCheck {
    pub verdict: Verdict,
    pub fd_step: f64,
    pub bound: f64,
    pub points: usize,
    pub components: Vec<ComponentResidual>,
    /// Largest difference between the h residuals under the two controls.
    pub h_composition_gap: Option<SupNorm>,
}

/// Factor on `fd_step^2` in the residual bound.
const FD_TRUNCATION_FACTOR: f64 = 10.0;
const RESIDUAL_FLOOR: f64 = 1e-6;

pub fn residual_bound(fd_step: f64) -> f64 {
    RESIDUAL_FLOOR.max(FD_TRUNCATION_FACTOR * fd_step * fd_step)
}

pub fn check_foc_residuals(sol: &SolutionPath, grid: &[f64], fd_step: f64) -> Result<ResidualCheck> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must be > 0, got {fd_step}"
        )));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        rows.push((t, foc_residuals_at(sol, t, fd_step)?));
    }
    let components: Vec<ComponentResidual> = RESIDUAL_NAMES
        .iter()
        .enumerate()
        .map(|(i, &component)| ComponentResidual {
            component,
            sup: sup_norm(rows.iter().map(|(t, r)| (*t, r[i].abs()))),
        })
        .collect();
    let h_composition_gap = sup_norm(rows.iter().map(|(t, r)| (*t, (r[1] - r[4]).abs())));
    let bound = residual_bound(fd_step);
    let verdict = if rows.is_empty() {
        Verdict::Informational
    } else {
        // The second-set column is measured separately by the equivalence check.
        Verdict::from_bool(
            components
                .iter()
                .filter(|c| c.component != "h_form2")
                .all(|c| c.sup.is_some_and(|s| s.max <= bound)),
        )
    };
    Ok(ResidualCheck {
        verdict,
        fd_step,
        bound,
        points: rows.len(),
        components,
        h_composition_gap,
    })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitError {
    pub quantity: &'static str,
    pub value: f64,
    pub limit: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BgpAsymptoticsCheck {
    pub verdict: Verdict,
    pub t_long: f64,
    pub tol: f64,
    /// `e^(-xi t_long)`; the limits are only meaningful when this is small.
    pub residual_weight: f64,
    pub limits: Vec<LimitError>,
}

/// Control, composite ratio and growth rates at `t_long` against their
/// balanced-growth values. Errors are absolute except for z, which is
/// relative to `z*`.
pub fn check_bgp_asymptotics(sol: &SolutionPath, t_long: f64, fd_step: f64, tol: f64) -> Result<BgpAsymptoticsCheck> {
    let c = &sol.model.constants;
    let delta = sol.model.params.delta;
    let growth = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        Ok(((f(t_long + fd_step)?).ln() - (f(t_long - fd_step)?).ln()) / (2.0 * fd_step))
    };
    let u = sol.u_form1(t_long)?;
    let z = sol.z(t_long);
    let limits = vec![
        LimitError {
            quantity: "u",
            value: u,
            limit: c.u_star,
            error: (u - c.u_star).abs(),
        },
        LimitError {
            quantity: "z",
            value: z,
            limit: c.z_star,
            error: rel_gap(z, c.z_star),
        },
        limit("k_growth", growth(&|t| sol.k(t))?, c.chi),
        limit("c_growth", growth(&|t| Ok(sol.c(t)))?, c.chi),
        limit("h_growth", growth(&|t| sol.h(t))?, delta * (1.0 - c.u_star)),
    ];
    Ok(BgpAsymptoticsCheck {
        verdict: Verdict::from_bool(limits.iter().all(|l| l.error <= tol)),
        t_long,
        tol,
        residual_weight: (-c.xi * t_long).exp(),
        limits,
    })
}

fn limit(quantity: &'static str, value: f64, limit: f64) -> LimitError {
    LimitError {
        quantity,
        value,
        limit,
        error: (value - limit).abs(),
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentGap {
    pub component: &'static str,
    pub sup: SupNorm,
    pub worst_schedule_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonCheck {
    pub verdict: Verdict,
    pub horizon: f64,
    pub steps: usize,
    pub components: Vec<ComponentGap>,
}

impl ComparisonCheck {
    pub fn component(&self, name: &str) -> Option<&ComponentGap> {
        self.components.iter().find(|c| c.component == name)
    }
}

/// Integrate the full optimality system from the calibrated initial state and
/// compare each component with its closed form on the step points and `grid`.
/// A simulation failure surfaces as an error carrying the time of failure.
pub fn compare_closed_vs_simulated(
    sol: &SolutionPath,
    grid: &[f64],
    settings: &VerificationSettings,
) -> Result<ComparisonCheck> {
    let horizon = settings.compare_horizon;
    let traj = simulate_foc(&sol.model, &sol.initial_state(), horizon, &sol.tol)?;
    let mut times: Vec<f64> = traj.times().to_vec();
    times.extend(grid.iter().copied().filter(|&t| t <= horizon));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(times.len()); COMPONENTS.len()];
    for &t in &times {
        let sim = traj.eval(t)?;
        let closed = sol.point(t)?.state().to_array();
        for (i, s) in series.iter_mut().enumerate() {
            s.push((t, rel_gap(sim[i], closed[i])));
        }
    }
    let components: Vec<ComponentGap> = COMPONENTS
        .iter()
        .zip(&series)
        .map(|(&component, s)| ComponentGap {
            component,
            sup: sup_norm(s.iter().copied()).unwrap_or(SupNorm { max: 0.0, at: 0.0 }),
            worst_schedule_ratio: s.iter().map(|&(t, g)| g / settings.schedule(t)).fold(0.0, f64::max),
        })
        .collect();
    Ok(ComparisonCheck {
        verdict: Verdict::from_bool(components.iter().all(|c| c.worst_schedule_ratio <= 1.0)),
        horizon,
        steps: traj.len().saturating_sub(1),
        components,
    })
}

// ---------------------------------------------------------------------------

/// Outcome of one check: its result, or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum Checked<T> {
    Completed(T),
    Error { message: String },
}

impl<T> Checked<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Checked::Completed(v),
            Err(err) => Checked::Error {
                message: err.to_string(),
            },
        }
    }

    pub fn completed(&self) -> Option<&T> {
        match self {
            Checked::Completed(v) => Some(v),
            Checked::Error { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub u0: f64,
    pub c0: f64,
    pub z0: f64,
    pub f_star: f64,
    pub b_star: f64,
    pub lambda0: f64,
    pub mu0: f64,
    pub u_star: f64,
    pub z_star: f64,
    pub calibration_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckVerdict {
    pub check: &'static str,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub overall: Verdict,
    pub verdicts: Vec<CheckVerdict>,
    pub solution: SolutionSummary,
    pub settings: VerificationSettings,
    pub equivalence: Checked<EquivalenceCheck>,
    pub uniqueness: Checked<UniquenessCheck>,
    pub admissibility: AdmissibilityCheck,
    pub transversality: Checked<TransversalityCheck>,
    pub foc_residuals: Checked<ResidualCheck>,
    pub bgp_asymptotics: Checked<BgpAsymptoticsCheck>,
    pub comparison: Checked<ComparisonCheck>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.overall != Verdict::Fail
    }

    pub fn verdict(&self, check: &str) -> Option<Verdict> {
        self.verdicts.iter().find(|v| v.check == check).map(|v| v.verdict)
    }
}

fn verdict_of<T>(c: &Checked<T>, f: impl Fn(&T) -> Verdict) -> Verdict {
    c.completed().map_or(Verdict::Fail, f)
}

/// Run every check. Independent checks run in parallel; the report layout is
/// fixed.
pub fn run_all(sol: &SolutionPath, settings: &VerificationSettings) -> VerificationReport {
    let grid = uniform_grid(settings.horizon, settings.grid_step);
    let compare_grid = uniform_grid(settings.compare_horizon, settings.grid_step);
    let samples = uniform_grid(settings.horizon, settings.transversality_step);

    let ((equivalence, admissibility), ((uniqueness, comparison), ((transversality, foc_residuals), bgp_asymptotics))) =
        rayon::join(
            || {
                (
                    Checked::from_result(check_equivalence_u_forms(sol, &grid, settings.equiv_tol)),
                    check_admissibility(sol, &grid),
                )
            },
            || {
                rayon::join(
                    || {
                        rayon::join(
                            || Checked::from_result(check_uniqueness_ode(sol, &compare_grid, settings)),
                            || Checked::from_result(compare_closed_vs_simulated(sol, &compare_grid, settings)),
                        )
                    },
                    || {
                        rayon::join(
                            || {
                                rayon::join(
                                    || {
                                        Checked::from_result(check_transversality(
                                            sol,
                                            &samples,
                                            settings.horizon / 2.0,
                                        ))
                                    },
                                    || Checked::from_result(check_foc_residuals(sol, &grid, settings.fd_step)),
                                )
                            },
                            || {
                                Checked::from_result(check_bgp_asymptotics(
                                    sol,
                                    settings.bgp_horizon,
                                    settings.fd_step,
                                    settings.bgp_tol,
                                ))
                            },
                        )
                    },
                )
            },
        );

    let verdicts = vec![
        CheckVerdict {
            check: "equivalence",
            verdict: verdict_of(&equivalence, |c| c.verdict),
        },
        CheckVerdict {
            check: "uniqueness",
            verdict: verdict_of(&uniqueness, |c| c.verdict),
        },
        CheckVerdict {
            check: "admissibility",
            verdict: admissibility.verdict,
        },
        CheckVerdict {
            check: "transversality",
            verdict: verdict_of(&transversality, |c| c.verdict),
        },
        CheckVerdict {
            check: "foc_residuals",
            verdict: verdict_of(&foc_residuals, |c| c.verdict),
        },
        CheckVerdict {
            check: "bgp_asymptotics",
            verdict: verdict_of(&bgp_asymptotics, |c| c.verdict),
        },
        CheckVerdict {
            check: "comparison",
            verdict: verdict_of(&comparison, |c| c.verdict),
        },
    ];
    let overall = if verdicts.iter().any(|v| v.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };

    let mut notes = Vec::new();
    if let Some(eq) = equivalence.completed() {
        if eq.agreement == Some(Agreement::Discrepant) {
            let worst = eq.sup.expect("discrepant implies samples");
            notes.push(format!(
                "control formulas disagree: relative gap {:.3e} at t = {} exceeds {:.0e}; needs review",
                worst.max, worst.at, eq.tol
            ));
        }
    }
    if let Some(b) = bgp_asymptotics.completed() {
        if b.residual_weight >= 1e-8 {
            notes.push(format!(
                "bgp horizon {} is short: exp(-xi t) = {:.3e}",
                b.t_long, b.residual_weight
            ));
        }
    }
    for w in crate::params::validate(&sol.model.params).warnings() {
        notes.push(format!("warning: {} ({})", w.rule, w.message));
    }

    let cal = &sol.calibration;
    let c = &sol.model.constants;
    VerificationReport {
        overall,
        verdicts,
        solution: SolutionSummary {
            u0: cal.u0,
            c0: cal.c0,
            z0: cal.z0,
            f_star: cal.f_star,
            b_star: cal.b_star,
            lambda0: cal.lambda0,
            mu0: cal.mu0,
            u_star: c.u_star,
            z_star: c.z_star,
            calibration_residual: sol.diagnostics.residual,
        },
        settings: *settings,
        equivalence,
        uniqueness,
        admissibility,
        transversality,
        foc_residuals,
        bgp_asymptotics,
        comparison,
        notes,
    }
}
