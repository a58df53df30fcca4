//! Dormand–Prince 5(4) integrator with PI step-size control and
//! fifth-order continuous extension.

use super::{NumericsError, ToleranceSettings};

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step control.
const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Solution of an initial value problem: accepted breakpoints plus the
/// five continuous-extension coefficient vectors of every step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    // 5 * dim coefficients per step; step i spans times[i]..times[i + 1].
    coeffs: Vec<f64>,
}

impl DenseTrajectory {
    fn new(dim: usize, t0: f64, y0: &[f64]) -> Self {
        Self {
            dim,
            times: vec![t0],
            states: y0.to_vec(),
            coeffs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one point")
    }

    /// Stored state at breakpoint `i`.
    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Evaluate the continuous extension at `t`. Breakpoints return the
    /// stored state unchanged.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>, NumericsError> {
        let (t0, t1) = (self.t_start(), self.t_end());
        if !(t >= t0 && t <= t1) {
            return Err(NumericsError::OutOfSpan { t, t0, t1 });
        }
        // First breakpoint strictly greater than t.
        let upper = self.times.partition_point(|&ti| ti <= t);
        let idx = upper - 1;
        if self.times[idx] == t {
            return Ok(self.state(idx).to_vec());
        }
        let h = self.times[idx + 1] - self.times[idx];
        let s = (t - self.times[idx]) / h;
        let s1 = 1.0 - s;
        let base = idx * 5 * self.dim;
        let rc = |j: usize, i: usize| self.coeffs[base + j * self.dim + i];
        Ok((0..self.dim)
            .map(|i| rc(0, i) + s * (rc(1, i) + s1 * (rc(2, i) + s * (rc(3, i) + s1 * rc(4, i)))))
            .collect())
    }

    /// Evaluate a single component at `t`.
    pub fn eval_component(&self, t: f64, component: usize) -> Result<f64, NumericsError> {
        Ok(self.eval(t)?[component])
    }
}

struct Stages {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl Stages {
    fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            ytmp: vec![0.0; dim],
            ynew: vec![0.0; dim],
        }
    }
}

fn check_finite(t: f64, v: &[f64]) -> Result<(), NumericsError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFiniteRhs { t })
    }
}

/// One Dormand–Prince step from (t, y) with step h. Expects `k[0]` to hold
/// f(t, y); on return `ynew` holds the 5th order solution and `k[6]` holds
/// f(t + h, ynew).
fn dopri_step<E, F>(rhs: &mut F, t: f64, y: &[f64], h: f64, st: &mut Stages) -> Result<(), E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    E: From<NumericsError>,
{
    let n = y.len();
    macro_rules! stage {
        ($dst:expr, $c:expr, $($a:expr => $src:expr),+) => {{
            for i in 0..n {
                st.ytmp[i] = y[i] + h * (0.0 $(+ $a * st.k[$src][i])+);
            }
            rhs(t + $c * h, &st.ytmp, &mut st.k[$dst])?;
            check_finite(t + $c * h, &st.k[$dst])?;
        }};
    }
    stage!(1, C2, A21 => 0);
    stage!(2, C3, A31 => 0, A32 => 1);
    stage!(3, C4, A41 => 0, A42 => 1, A43 => 2);
    stage!(4, C5, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
    // Sixth stage lands at t + h.
    for i in 0..n {
        st.ytmp[i] =
            y[i] + h * (A61 * st.k[0][i] + A62 * st.k[1][i] + A63 * st.k[2][i] + A64 * st.k[3][i] + A65 * st.k[4][i]);
    }
    rhs(t + h, &st.ytmp, &mut st.k[5])?;
    check_finite(t + h, &st.k[5])?;
    for i in 0..n {
        st.ynew[i] =
            y[i] + h * (A71 * st.k[0][i] + A73 * st.k[2][i] + A74 * st.k[3][i] + A75 * st.k[4][i] + A76 * st.k[5][i]);
    }
    rhs(t + h, &st.ynew, &mut st.k[6])?;
    check_finite(t + h, &st.k[6])?;
    Ok(())
}

fn initial_step<E, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    tol: &ToleranceSettings,
) -> Result<f64, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    E: From<NumericsError>,
{
    let n = y0.len() as f64;
    let sk = |y: f64| tol.ode_abs_tol + tol.ode_rel_tol * y.abs();
    let d0 = (y0.iter().map(|&y| (y / sk(y)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (y0.iter().zip(f0).map(|(&y, &f)| (f / sk(y)).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(&y, &f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    rhs(t0 + h0, &y1, &mut f1)?;
    check_finite(t0 + h0, &f1)?;
    let d2 = (y0
        .iter()
        .zip(f0.iter().zip(&f1))
        .map(|(&y, (&a, &b))| ((b - a) / sk(y)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrate `y' = rhs(t, y)` on `[t0, t1]` with adaptive Dormand–Prince 5(4).
pub fn integrate_ode<F>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    tol: &ToleranceSettings,
) -> Result<DenseTrajectory, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    try_integrate_ode(
        |t, y: &[f64], dy: &mut [f64]| {
            rhs(t, y, dy);
            Ok::<(), NumericsError>(())
        },
        y0,
        t0,
        t1,
        tol,
    )
}

/// Fallible-callback variant of [`integrate_ode`]. A span with `t1 == t0`
/// yields a trajectory holding only the initial point.
pub fn try_integrate_ode<E, F>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    tol: &ToleranceSettings,
) -> Result<DenseTrajectory, E>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
    E: From<NumericsError>,
{
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(NumericsError::InvalidSpan { t0, t1 }.into());
    }
    tol.validate()?;
    let dim = y0.len();
    let mut traj = DenseTrajectory::new(dim, t0, y0);
    if t1 == t0 {
        return Ok(traj);
    }

    let mut st = Stages::new(dim);
    let mut y = y0.to_vec();
    let mut t = t0;
    rhs(t, &y, &mut st.k[0])?;
    check_finite(t, &st.k[0])?;

    let f0 = st.k[0].clone();
    let mut h = initial_step(&mut rhs, t0, y0, &f0, t1 - t0, tol)?;
    let expo = 0.2 - PI_BETA * 0.75;
    let mut steps: u64 = 0;
    let mut rejected_last = false;

    loop {
        if steps >= tol.max_steps {
            return Err(NumericsError::MaxStepsExceeded {
                t,
                max_steps: tol.max_steps,
            }
            .into());
        }
        steps += 1;

        let mut last = false;
        if t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(NumericsError::StepSizeUnderflow { t }.into());
        }

        dopri_step(&mut rhs, t, &y, h, &mut st)?;

        let mut err = 0.0;
        for i in 0..dim {
            let sk = tol.ode_abs_tol + tol.ode_rel_tol * y[i].abs().max(st.ynew[i].abs());
            let e = h
                * (E1 * st.k[0][i]
                    + E3 * st.k[2][i]
                    + E4 * st.k[3][i]
                    + E5 * st.k[4][i]
                    + E6 * st.k[5][i]
                    + E7 * st.k[6][i]);
            err += (e / sk).powi(2);
        }
        let err = if dim == 0 { 0.0 } else { (err / dim as f64).sqrt() };

        let fac11 = err.powf(expo);
        if err <= 1.0 {
            // Accepted: record the continuous extension, slot-major.
            let base = traj.coeffs.len();
            traj.coeffs.resize(base + 5 * dim, 0.0);
            for i in 0..dim {
                let ydiff = st.ynew[i] - y[i];
                let bspl = h * st.k[0][i] - ydiff;
                let rc5 = h
                    * (D1 * st.k[0][i]
                        + D3 * st.k[2][i]
                        + D4 * st.k[3][i]
                        + D5 * st.k[4][i]
                        + D6 * st.k[5][i]
                        + D7 * st.k[6][i]);
                traj.coeffs[base + i] = y[i];
                traj.coeffs[base + dim + i] = ydiff;
                traj.coeffs[base + 2 * dim + i] = bspl;
                traj.coeffs[base + 3 * dim + i] = ydiff - h * st.k[6][i] - bspl;
                traj.coeffs[base + 4 * dim + i] = rc5;
            }

            let fac_old = err.max(1e-4);
            let t_next = if last { t1 } else { t + h };
            y.copy_from_slice(&st.ynew);
            st.k.swap(0, 6);
            t = t_next;
            traj.times.push(t);
            traj.states.extend_from_slice(&y);
            if last {
                return Ok(traj);
            }

            let mut fac = fac11 / fac_old.powf(PI_BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            rejected_last = true;
        }
    }
}

/// Fixed-step Dormand–Prince propagation (5th order weights), returning the
/// state at `t1`. Used for convergence-order checks.
pub fn integrate_fixed_step<F>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    n_steps: usize,
) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(t1 > t0) || n_steps == 0 {
        return Err(NumericsError::InvalidSpan { t0, t1 });
    }
    let mut wrapped = |t, y: &[f64], dy: &mut [f64]| {
        rhs(t, y, dy);
        Ok::<(), NumericsError>(())
    };
    let h = (t1 - t0) / n_steps as f64;
    let mut st = Stages::new(y0.len());
    let mut y = y0.to_vec();
    wrapped(t0, &y, &mut st.k[0])?;
    for step in 0..n_steps {
        let t = t0 + step as f64 * h;
        dopri_step(&mut wrapped, t, &y, h, &mut st)?;
        y.copy_from_slice(&st.ynew);
        st.k.swap(0, 6);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
    }

    #[test]
    fn exponential_decay_within_tolerance() {
        let tol = ToleranceSettings::default();
        let traj = integrate_ode(decay, &[1.0], 0.0, 1.0, &tol).unwrap();
        let y1 = traj.last_state()[0];
        let exact = (-1.0f64).exp();
        assert!((y1 - exact).abs() / exact < 1e-9, "{y1} vs {exact}");
        assert_eq!(traj.t_end(), 1.0);
    }

    #[test]
    fn constant_solution_is_exact() {
        let tol = ToleranceSettings::default();
        let traj = integrate_ode(|_, _, dy| dy[0] = 0.0, &[3.25], 0.0, 10.0, &tol).unwrap();
        for i in 0..traj.len() {
            assert_eq!(traj.state(i)[0], 3.25);
        }
        assert_eq!(traj.eval(4.321).unwrap()[0], 3.25);
    }

    #[test]
    fn zero_span_gives_single_breakpoint() {
        let tol = ToleranceSettings::default();
        let traj = integrate_ode(decay, &[2.0], 1.5, 1.5, &tol).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.eval(1.5).unwrap(), vec![2.0]);
    }

    #[test]
    fn reversed_span_is_rejected() {
        let tol = ToleranceSettings::default();
        let err = integrate_ode(decay, &[1.0], 1.0, 0.0, &tol).unwrap_err();
        assert!(matches!(err, NumericsError::InvalidSpan { .. }));
    }

    #[test]
    fn dense_output_reproduces_breakpoints_exactly() {
        let tol = ToleranceSettings::default();
        let traj = integrate_ode(
            |t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0] + 0.1 * t.sin();
            },
            &[1.0, 0.0],
            0.0,
            20.0,
            &tol,
        )
        .unwrap();
        for (i, &t) in traj.times().iter().enumerate() {
            assert_eq!(traj.eval(t).unwrap(), traj.state(i).to_vec());
        }
    }

    #[test]
    fn dense_output_interpolates_accurately() {
        let tol = ToleranceSettings {
            ode_rel_tol: 1e-8,
            ode_abs_tol: 1e-10,
            ..Default::default()
        };
        let traj = integrate_ode(decay, &[1.0], 0.0, 5.0, &tol).unwrap();
        for j in 0..=100 {
            let t = 0.05 * j as f64;
            let y = traj.eval(t).unwrap()[0];
            assert!((y - (-t).exp()).abs() < 1e-8, "t = {t}");
        }
        assert!(traj.eval(5.1).is_err());
    }

    #[test]
    fn non_finite_rhs_is_reported() {
        let tol = ToleranceSettings::default();
        let err = integrate_ode(
            |t, _, dy| dy[0] = if t > 0.5 { f64::NAN } else { 1.0 },
            &[0.0],
            0.0,
            1.0,
            &tol,
        )
        .unwrap_err();
        assert!(matches!(err, NumericsError::NonFiniteRhs { t } if t > 0.5));
    }

    #[test]
    fn max_steps_is_enforced() {
        let tol = ToleranceSettings {
            max_steps: 3,
            ..Default::default()
        };
        let err = integrate_ode(decay, &[1.0], 0.0, 100.0, &tol).unwrap_err();
        assert!(matches!(err, NumericsError::MaxStepsExceeded { .. }));
    }

    #[test]
    fn blow_up_underflows_step_size() {
        // y' = y^2, y(0) = 1 blows up at t = 1.
        let tol = ToleranceSettings::default();
        let err = integrate_ode(|_, y, dy| dy[0] = y[0] * y[0], &[1.0], 0.0, 2.0, &tol).unwrap_err();
        match err {
            NumericsError::StepSizeUnderflow { t } => assert!((t - 1.0).abs() < 1e-3),
            NumericsError::NonFiniteRhs { t } => assert!((t - 1.0).abs() < 1e-3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn callback_errors_propagate_unchanged() {
        #[derive(Debug, PartialEq)]
        enum MyErr {
            Stop(f64),
            Num(NumericsError),
        }
        impl From<NumericsError> for MyErr {
            fn from(e: NumericsError) -> Self {
                MyErr::Num(e)
            }
        }
        let tol = ToleranceSettings::default();
        let err = try_integrate_ode(
            |t, _y: &[f64], dy: &mut [f64]| {
                if t > 0.25 {
                    return Err(MyErr::Stop(t));
                }
                dy[0] = 1.0;
                Ok(())
            },
            &[0.0],
            0.0,
            1.0,
            &tol,
        )
        .unwrap_err();
        assert!(matches!(err, MyErr::Stop(t) if t > 0.25));
    }

    #[test]
    fn tighter_tolerance_reduces_global_error() {
        let exact = (-10.0f64).exp();
        let mut errors = Vec::new();
        for rtol in [1e-6, 5e-7, 1e-8, 1e-10] {
            let tol = ToleranceSettings {
                ode_rel_tol: rtol,
                ode_abs_tol: rtol * 1e-4,
                ..Default::default()
            };
            let traj = integrate_ode(decay, &[1.0], 0.0, 10.0, &tol).unwrap();
            errors.push((traj.last_state()[0] - exact).abs());
        }
        for pair in errors.windows(2) {
            assert!(pair[1] < pair[0], "{errors:?}");
        }
    }

    #[test]
    fn fixed_step_order_is_five() {
        let exact = (-1.0f64).exp();
        let steps = [5usize, 10, 20, 40];
        let errs: Vec<f64> = steps
            .iter()
            .map(|&n| (integrate_fixed_step(decay, &[1.0], 0.0, 1.0, n).unwrap()[0] - exact).abs())
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 5.0).abs() <= 0.3, "slope {slope}, errors {errs:?}");
        }
    }
}
