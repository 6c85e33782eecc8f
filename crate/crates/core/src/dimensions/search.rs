//! Zero isolation for nonlattice ratio lists.
//!
//! The search window `[σ_low, D + 0.5] × [-T, T]` is bisected recursively,
//! longer side first, until every piece holds at most one zero; single zeros
//! are then polished by Newton from the piece's centre. Halves are processed
//! with `rayon::join` and concatenated in a fixed order, so the result does
//! not depend on the number of threads.

use super::winding::winding_count;
use super::{newton, ComplexDimension, DirichletPolynomial, Rect};
use crate::error::{Result, TubeError};
use crate::model::RatioList;
use crate::moran::similarity_dimension;

/// Split positions tried in order; the first is deliberately off-centre so
/// that symmetric windows are not cut along the real axis.
const SPLIT_FRACTIONS: [f64; 6] = [0.5123, 0.4789, 0.5317, 0.4591, 0.5503, 0.4393];

/// Outward perturbation step for the full window.
const PERTURBATION: f64 = 1e-6;

/// Retries after the first attempt.
const RETRIES: usize = 5;

/// Below this diameter a piece still holding several zeros is reported as
/// one multiple zero at its centre.
const MULTIPLE_ZERO_SIZE: f64 = 1e-8;

/// Margin between the zero-free bound and the window's left edge.
const LEFT_MARGIN: f64 = 0.5;

/// Largest σ at which `m_min r_min^σ > 1 + Σ_{r_j > r_min} r_j^σ`.
///
/// Left of it `|Σ r_j^s| > 1`, so `f` has no zeros there. The ratio of the
/// two sides grows monotonically as σ decreases, so the bound is found by
/// stepping left from `D` in unit steps and bisecting the last step.
pub fn sigma_lower_bound(ratios: &RatioList) -> f64 {
    let poly = DirichletPolynomial::new(ratios);
    let dominates = |sigma: f64| {
        let (lead, others) = poly.dominance_terms(sigma);
        lead > others
    };
    let d = similarity_dimension(ratios).value;
    let mut hi = d;
    let mut lo = d - 1.0;
    while !dominates(lo) {
        hi = lo;
        lo -= 1.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dominates(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The window searched for zeros with `|Im s| ≤ T`.
pub fn search_window(ratios: &RatioList, im_window: f64, re_floor: Option<f64>) -> Result<Rect> {
    let d = similarity_dimension(ratios).value;
    let left = re_floor.unwrap_or_else(|| sigma_lower_bound(ratios) - LEFT_MARGIN);
    Rect::new(left, d + 0.5, -im_window, im_window)
}

pub(crate) fn search_zeros(
    ratios: &RatioList,
    im_window: f64,
    re_floor: Option<f64>,
) -> Result<Vec<ComplexDimension>> {
    let poly = DirichletPolynomial::new(ratios);
    let mut window = search_window(ratios, im_window, re_floor)?;
    let mut attempt = 0;
    let count = loop {
        match winding_count(&poly, &window) {
            Ok(c) => break c,
            Err(TubeError::BoundaryProximity(_)) if attempt < RETRIES => {
                attempt += 1;
                window = window.expanded(PERTURBATION);
            }
            Err(e) => return Err(e),
        }
    };
    isolate(&poly, window, count)
}

fn isolate(poly: &DirichletPolynomial, rect: Rect, count: u32) -> Result<Vec<ComplexDimension>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let diameter = rect.diameter();
    if count == 1 {
        if let Some(zero) = newton(poly, rect.center(), 2.0 * diameter) {
            if rect.contains(zero.point, 1e-12 * (1.0 + zero.point.norm())) {
                return Ok(vec![zero]);
            }
        }
        if diameter < MULTIPLE_ZERO_SIZE {
            return Err(TubeError::Convergence(format!(
                "Newton failed inside a piece of diameter {diameter:e} around {}",
                rect.center()
            )));
        }
    } else if diameter < MULTIPLE_ZERO_SIZE {
        return Ok(vec![centroid(poly, &rect, count)]);
    }

    let mut last_err = None;
    for fraction in SPLIT_FRACTIONS {
        let (first, second) = split(&rect, fraction);
        let counts = (winding_count(poly, &first), winding_count(poly, &second));
        match counts {
            (Ok(a), Ok(b)) if a + b == count => {
                let (left, right) = rayon::join(
                    || isolate(poly, first, a),
                    || isolate(poly, second, b),
                );
                let mut out = left?;
                out.extend(right?);
                return Ok(out);
            }
            (Ok(a), Ok(b)) => {
                last_err = Some(TubeError::BoundaryProximity(format!(
                    "halves of {rect:?} count {a} + {b}, parent counts {count}"
                )))
            }
            (Err(e), _) | (_, Err(e)) => {
                if count > 1 && diameter < 1e3 * MULTIPLE_ZERO_SIZE {
                    // Winding is unresolvable this close to a multiple zero.
                    return Ok(vec![centroid(poly, &rect, count)]);
                }
                last_err = Some(e);
            }
        }
    }
    Err(last_err.expect("at least one split attempted"))
}

fn centroid(poly: &DirichletPolynomial, rect: &Rect, count: u32) -> ComplexDimension {
    let point = rect.center();
    ComplexDimension { point, multiplicity: count, residual: poly.eval(point).norm() }
}

/// Cut across the longer side at `fraction` of its length.
fn split(rect: &Rect, fraction: f64) -> (Rect, Rect) {
    if rect.width() >= rect.height() {
        let cut = rect.re_min + fraction * rect.width();
        (Rect { re_max: cut, ..*rect }, Rect { re_min: cut, ..*rect })
    } else {
        let cut = rect.im_min + fraction * rect.height();
        (Rect { im_max: cut, ..*rect }, Rect { im_min: cut, ..*rect })
    }
}
