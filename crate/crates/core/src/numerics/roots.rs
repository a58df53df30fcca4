//! Bracketed root finding: a uniform sign-change scan and Brent's method.

use super::NumericsError;

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Result of a uniform scan for sign changes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanOutcome {
    /// Every subinterval with a sign change, left to right.
    pub brackets: Vec<(f64, f64)>,
    /// Grid points where `g` was not finite; these are skipped.
    pub skipped: Vec<f64>,
    /// Grid points and the sign of `g` there (-1, 0, 1), finite samples only.
    pub signs: Vec<(f64, i8)>,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Scan `g` on `n_points` uniformly spaced points of `[lo, hi]` (endpoints
/// included) and return every subinterval over which it changes sign.
///
/// An exact zero at an interior grid point belongs to the subinterval on its
/// left; a zero at `lo` belongs to the first subinterval.
pub fn scan_all_brackets<E, G>(mut g: G, lo: f64, hi: f64, n_points: usize) -> Result<ScanOutcome, E>
where
    G: FnMut(f64) -> Result<f64, E>,
{
    assert!(lo < hi && n_points >= 2, "scan needs lo < hi and at least two points");
    let step = (hi - lo) / (n_points - 1) as f64;
    let mut out = ScanOutcome::default();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n_points {
        let x = if i == n_points - 1 { hi } else { lo + i as f64 * step };
        let gx = g(x)?;
        if !gx.is_finite() {
            out.skipped.push(x);
            continue;
        }
        out.signs.push((x, sign(gx)));
        if let Some((px, pg)) = prev {
            let zero_at_left_start = pg == 0.0 && out.brackets.is_empty() && px == lo;
            if (pg * gx < 0.0) || gx == 0.0 || zero_at_left_start {
                out.brackets.push((px, x));
            }
        }
        prev = Some((x, gx));
    }
    Ok(out)
}

/// Leftmost sign-change bracket of `g`, or `None`.
pub fn scan_bracket<G>(mut g: G, lo: f64, hi: f64, n_points: usize) -> (Option<(f64, f64)>, Vec<f64>)
where
    G: FnMut(f64) -> f64,
{
    let out = scan_all_brackets(|x| Ok::<f64, NumericsError>(g(x)), lo, hi, n_points).expect("infallible callback");
    (out.brackets.first().copied(), out.skipped)
}

/// Brent's method on `[lo, hi]`.
pub fn find_root<G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<Root, NumericsError>
where
    G: FnMut(f64) -> f64,
{
    try_find_root(|x| Ok::<f64, NumericsError>(g(x)), lo, hi, tol)
}

/// Fallible-callback variant of [`find_root`]. Iterates stay inside the
/// bracket; terminates when the bracket half-width is below
/// `2 eps |x| + tol / 2` or an exact zero is hit.
pub fn try_find_root<E, G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<Root, E>
where
    G: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let mut eval = |x: f64| -> Result<f64, E> {
        let v = g(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFiniteFunction { x }.into())
        }
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            fx: fa,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            fx: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange {
            lo,
            hi,
            g_lo: fa,
            g_hi: fb,
        }
        .into());
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iteration in 1..=MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(Root {
                x: b,
                fx: fb,
                iterations: iteration,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // Secant.
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                // Inverse quadratic interpolation.
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(b)?;
    }
    Err(NumericsError::MaxIterations {
        iterations: MAX_ITERATIONS,
    }
    .into())
}
