//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::{Error, Result};

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

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 48;

/// One Kronrod estimate and its difference from the embedded Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let pair = f(c - h * x) + f(c + h * x);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// `∫_a^b f` to absolute tolerance `tol`, by recursive bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = gk15(&f, a, b);
    refine(&f, a, b, whole, err, tol, tol * TOL_FLOOR, 0)
}

/// Subinterval tolerances halve with depth but never drop below this
/// fraction of the requested tolerance, so endpoint singularities that
/// force deep bisection still terminate.
const TOL_FLOOR: f64 = 1e-6;

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    tol: f64,
    floor: f64,
    depth: u32,
) -> Result<f64> {
    if !whole.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let tol = tol.max(floor);
    if err <= tol {
        return Ok(whole);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NumericalFailure(format!(
            "quadrature did not converge on [{a}, {b}] (error estimate {err:e})"
        )));
    }
    let mid = 0.5 * (a + b);
    let (left, el) = gk15(f, a, mid);
    let (right, er) = gk15(f, mid, b);
    // Stop once the halves agree with the parent to rounding.
    if (left + right - whole).abs() <= 1e-15 * whole.abs()
        && el + er <= tol.max(1e-15 * whole.abs())
    {
        return Ok(left + right);
    }
    let l = refine(f, a, mid, left, el, tol / 2.0, floor, depth + 1)?;
    let r = refine(f, mid, b, right, er, tol / 2.0, floor, depth + 1)?;
    Ok(l + r)
}
