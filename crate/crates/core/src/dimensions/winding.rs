//! Zero counting by the argument principle.
//!
//! The winding integral `(1/2πi) ∮ f'/f ds` is accumulated edge by edge
//! through its antiderivative `log f`. A step from `a` to `b` contributes
//! `arg(f(b)/f(a))` once it is certified that `f` stays in a half-plane along
//! the step: with `M` a bound for `|f'|` on the step,
//! `|b - a| · M < max(|f(a)|, |f(b)|)` keeps `f(x)/f(anchor)` inside the unit
//! disc around 1. Uncertified steps are bisected.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{DirichletPolynomial, Rect};
use crate::error::{Result, TubeError};
use crate::model::RatioList;

/// Bisection depth after which a step is declared to pass through a zero.
const MAX_DEPTH: u32 = 48;

/// Tolerance for rounding the winding number to an integer.
pub const INTEGER_SLACK: f64 = 0.25;

/// Number of zeros of `1 - Σ r_j^s` inside `rect`, counted with multiplicity.
pub fn count_zeros_rectangle(ratios: &RatioList, rect: Rect) -> Result<u32> {
    winding_count(&DirichletPolynomial::new(ratios), &rect)
}

pub(crate) fn winding_count(poly: &DirichletPolynomial, rect: &Rect) -> Result<u32> {
    let corners = rect.corners();
    let values: Vec<Complex64> = corners.iter().map(|&c| poly.eval(c)).collect();
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        total += arg_change(poly, a, b, values[k], values[(k + 1) % 4], 0)?;
    }
    let winding = total / (2.0 * PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > INTEGER_SLACK || rounded < 0.0 {
        return Err(TubeError::BoundaryProximity(format!(
            "winding integral {winding} is not near a nonnegative integer"
        )));
    }
    Ok(rounded as u32)
}

fn arg_change(
    poly: &DirichletPolynomial,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: u32,
) -> Result<f64> {
    let anchor = fa.norm().max(fb.norm());
    let bound = poly.derivative_bound(a.re.min(b.re));
    if (b - a).norm() * bound < anchor * (1.0 - 1e-12) {
        return Ok((fb / fa).arg());
    }
    if depth >= MAX_DEPTH || fa.norm() == 0.0 || fb.norm() == 0.0 {
        return Err(TubeError::BoundaryProximity(format!(
            "contour segment near {a} passes through or next to a zero"
        )));
    }
    let mid = 0.5 * (a + b);
    let fm = poly.eval(mid);
    Ok(arg_change(poly, a, mid, fa, fm, depth + 1)? + arg_change(poly, mid, b, fm, fb, depth + 1)?)
}
