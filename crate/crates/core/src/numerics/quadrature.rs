//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(tol, tol * |value|)`. The per-interval estimate
//! is `|K15 - G7|`, which bounds the error of the 7-point rule and is far
//! larger than the true error of the 15-point result on smooth integrands.

use super::NumericsError;

const MAX_SUBDIVISIONS: usize = 4000;

// Kronrod abscissae on [0, 1]; odd indices are the Gauss points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<E, G>(g: &mut G, a: f64, b: f64) -> Result<Segment, E>
where
    G: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, E> {
        let v = g(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFiniteIntegrand { x }.into())
        }
    };
    let fc = eval(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx)? + eval(center + dx)?;
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment { a, b, value, error })
}

/// Integrate `g` over `[a, b]` to tolerance `max(tol, tol * |value|)`.
pub fn adaptive_quadrature<G>(mut g: G, a: f64, b: f64, tol: f64) -> Result<QuadratureResult, NumericsError>
where
    G: FnMut(f64) -> f64,
{
    try_adaptive_quadrature(|x| Ok::<f64, NumericsError>(g(x)), a, b, tol)
}

/// Fallible-integrand variant of [`adaptive_quadrature`].
pub fn try_adaptive_quadrature<E, G>(mut g: G, a: f64, b: f64, tol: f64) -> Result<QuadratureResult, E>
where
    G: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    if !(a.is_finite() && b.is_finite() && b >= a) {
        return Err(NumericsError::InvalidInterval { a, b }.into());
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
        });
    }
    let mut segments = vec![gauss_kronrod(&mut g, a, b)?];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tol.max(tol * value.abs()) {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                subdivisions_used: segments.len() - 1,
            });
        }
        if segments.len() > MAX_SUBDIVISIONS {
            return Err(NumericsError::SubdivisionLimit {
                limit: MAX_SUBDIVISIONS,
                error,
            }
            .into());
        }
        let (worst, _) =
            segments.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, s)| {
                    if s.error > acc.1 {
                        (i, s.error)
                    } else {
                        acc
                    }
                },
            );
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Interval cannot be split further in floating point.
            return Err(NumericsError::SubdivisionLimit {
                limit: segments.len() + 1,
                error,
            }
            .into());
        }
        segments.push(gauss_kronrod(&mut g, seg.a, mid)?);
        segments.push(gauss_kronrod(&mut g, mid, seg.b)?);
    }
}
