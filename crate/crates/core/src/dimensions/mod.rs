//! Complex dimensions: the zeros of `f(s) = 1 - Σ_j r_j^s`.
//!
//! Lattice ratio lists reduce to polynomial roots after the substitution
//! `z = r^s` ([`lattice`]). Everything else is located with the argument
//! principle ([`winding`]) and recursive rectangle bisection ([`search`]).

pub mod lattice;
pub mod search;
pub mod winding;

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Result, TubeError};
use crate::model::{RatioList, SprayModel};

pub use lattice::{detect_lattice, lattice_zeros, LatticeStructure};
pub use search::{search_window, sigma_lower_bound};
pub use winding::count_zeros_rectangle;

/// Largest accepted `|f(ω)|` for a returned zero.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Newton target for `|f(ω)|`.
pub const NEWTON_TARGET: f64 = 1e-12;

/// Zeros closer than this are treated as the same point.
pub const DEDUP_DISTANCE: f64 = 1e-8;

/// Minimum distance between a zero and the integer poles `0..n-1`.
pub const INTEGER_SEPARATION: f64 = 1e-6;

const MAX_NEWTON_STEPS: usize = 100;

/// A zero of `1 - Σ r_j^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDimension {
    pub point: Complex64,
    pub multiplicity: u32,
    /// `|f(point)|`
    pub residual: f64,
}

impl ComplexDimension {
    pub fn re(&self) -> f64 {
        self.point.re
    }

    pub fn im(&self) -> f64 {
        self.point.im
    }
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite())
            && re_min < re_max
            && im_min < im_max;
        if !ok {
            return Err(TubeError::InvalidInput(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, s: Complex64, margin: f64) -> bool {
        s.re >= self.re_min - margin
            && s.re <= self.re_max + margin
            && s.im >= self.im_min - margin
            && s.im <= self.im_max + margin
    }

    /// Grow every side by `step · (1 + |coordinate|)`.
    pub fn expanded(&self, step: f64) -> Rect {
        let grow = |v: f64| step * (1.0 + v.abs());
        Rect {
            re_min: self.re_min - grow(self.re_min),
            re_max: self.re_max + grow(self.re_max),
            im_min: self.im_min - grow(self.im_min),
            im_max: self.im_max + grow(self.im_max),
        }
    }

    /// Corners in counterclockwise order starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// `f(s) = 1 - Σ_j r_j^s` with equal ratios merged into multiplicities.
#[derive(Debug, Clone)]
pub struct DirichletPolynomial {
    /// `(ln r, multiplicity)` in descending order of `r`.
    terms: Vec<(f64, f64)>,
}

impl DirichletPolynomial {
    pub fn new(ratios: &RatioList) -> Self {
        let terms = ratios.distinct().into_iter().map(|(r, m)| (r.ln(), m as f64)).collect();
        Self { terms }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &(ln_r, m) in &self.terms {
            acc -= m * (s * ln_r).exp();
        }
        acc
    }

    /// `f'(s) = -Σ_j r_j^s ln r_j`.
    pub fn derivative(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(ln_r, m) in &self.terms {
            acc -= m * ln_r * (s * ln_r).exp();
        }
        acc
    }

    pub fn eval_with_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut f = Complex64::new(1.0, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        for &(ln_r, m) in &self.terms {
            let e = m * (s * ln_r).exp();
            f -= e;
            df -= ln_r * e;
        }
        (f, df)
    }

    /// Upper bound for `|f'(s)|` on the half-plane `Re s ≥ sigma`.
    pub fn derivative_bound(&self, sigma: f64) -> f64 {
        self.terms.iter().map(|&(ln_r, m)| m * ln_r.abs() * (sigma * ln_r).exp()).sum()
    }

    /// `Σ_j r_j^σ` split into the smallest ratio's share and the rest:
    /// `(m_min r_min^σ, 1 + Σ_{r_j > r_min} r_j^σ)`.
    pub(crate) fn dominance_terms(&self, sigma: f64) -> (f64, f64) {
        let (last, rest) = self.terms.split_last().expect("nonempty ratio list");
        let lead = last.1 * (sigma * last.0).exp();
        let others = 1.0 + rest.iter().map(|&(ln_r, m)| m * (sigma * ln_r).exp()).sum::<f64>();
        (lead, others)
    }
}

/// Newton iteration on `f` from `seed`.
pub fn refine_zero(ratios: &RatioList, seed: Complex64) -> Result<ComplexDimension> {
    newton(&DirichletPolynomial::new(ratios), seed, f64::INFINITY)
        .ok_or_else(|| TubeError::Convergence(format!("Newton from {seed} did not converge")))
}

/// Newton on `f`, abandoned if any step exceeds `max_step`.
pub(crate) fn newton(
    poly: &DirichletPolynomial,
    seed: Complex64,
    max_step: f64,
) -> Option<ComplexDimension> {
    let mut s = seed;
    for _ in 0..MAX_NEWTON_STEPS {
        let (f, df) = poly.eval_with_derivative(s);
        if f.norm() < NEWTON_TARGET {
            return Some(ComplexDimension { point: s, multiplicity: 1, residual: f.norm() });
        }
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        if !(step.norm() <= max_step) {
            return None;
        }
        s -= step;
        // Stagnation: rounding in the phase of r^s dominates at large |Im s|.
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + s.norm()) {
            let residual = poly.eval(s).norm();
            return (residual < RESIDUAL_LIMIT)
                .then_some(ComplexDimension { point: s, multiplicity: 1, residual });
        }
    }
    None
}

/// Order by imaginary part, then real part.
pub(crate) fn by_im_then_re(a: &ComplexDimension, b: &ComplexDimension) -> Ordering {
    a.im().total_cmp(&b.im()).then_with(|| a.re().total_cmp(&b.re()))
}

/// Sort and merge points closer than [`DEDUP_DISTANCE`].
pub(crate) fn sort_and_dedup(mut zeros: Vec<ComplexDimension>) -> Vec<ComplexDimension> {
    zeros.sort_by(by_im_then_re);
    let mut out: Vec<ComplexDimension> = Vec::with_capacity(zeros.len());
    for z in zeros {
        let duplicate = out
            .iter()
            .rev()
            .take_while(|p| z.im() - p.im() < DEDUP_DISTANCE)
            .any(|p| (p.point - z.point).norm() < DEDUP_DISTANCE);
        if !duplicate {
            out.push(z);
        }
    }
    out
}

/// Complex dimensions of the spray with `|Im ω| ≤ T`, sorted by `(Im, Re)`.
///
/// Lattice ratio lists are solved exactly; nonlattice lists are searched in
/// [`search_window`]. `re_floor` replaces the computed left edge of the
/// search window (and, for lattice lists, drops zeros left of it).
pub fn find_complex_dimensions(
    model: &SprayModel,
    im_window: f64,
    re_floor: Option<f64>,
) -> Result<Vec<ComplexDimension>> {
    let zeros = find_zeros(model.ratios(), im_window, re_floor)?;
    let n = model.dimension();
    for z in &zeros {
        for i in 0..n {
            if (z.point - Complex64::new(i as f64, 0.0)).norm() < INTEGER_SEPARATION {
                return Err(TubeError::Precondition(format!(
                    "complex dimension {} lies within {INTEGER_SEPARATION} of the pole at {i}",
                    z.point
                )));
            }
        }
    }
    Ok(zeros)
}

/// Zeros of `1 - Σ r_j^s` with `|Im s| ≤ T`; see [`find_complex_dimensions`].
pub fn find_zeros(
    ratios: &RatioList,
    im_window: f64,
    re_floor: Option<f64>,
) -> Result<Vec<ComplexDimension>> {
    if !im_window.is_finite() || im_window <= 0.0 {
        return Err(TubeError::Domain(format!("window T = {im_window} must be positive")));
    }
    let structure = detect_lattice(ratios);
    let zeros = if structure.is_lattice() {
        let mut z = lattice_zeros(&structure, ratios, im_window)?;
        if let Some(floor) = re_floor {
            z.retain(|w| w.re() >= floor);
        }
        z
    } else {
        search::search_zeros(ratios, im_window, re_floor)?
    };
    Ok(sort_and_dedup(zeros))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::models::cantor_spray;
    use crate::moran::similarity_dimension;
    use std::f64::consts::PI;

    fn ratios(v: &[f64]) -> RatioList {
        RatioList::new(v.to_vec()).unwrap()
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = DirichletPolynomial::new(&ratios(&[0.5, 1.0 / 3.0, 0.25]));
        let s = Complex64::new(0.3, 7.0);
        let h = 1e-6;
        let fd = (p.eval(s + h) - p.eval(s - h)) / (2.0 * h);
        assert!((fd - p.derivative(s)).norm() < 1e-8);
    }

    #[test]
    fn refine_examples() {
        let third = ratios(&[1.0 / 3.0, 1.0 / 3.0]);
        let d = 2f64.ln() / 3f64.ln();
        let p = 2.0 * PI / 3f64.ln();

        let w = refine_zero(&third, Complex64::new(0.6, 0.1)).unwrap();
        assert!((w.point - Complex64::new(d, 0.0)).norm() < 1e-10);
        assert!(w.residual < 1e-12);

        let w = refine_zero(&third, Complex64::new(0.6, 5.5)).unwrap();
        assert!((w.point - Complex64::new(d, p)).norm() < 1e-10);

        let w = refine_zero(&ratios(&[0.5, 0.5, 0.5]), Complex64::new(1.5, 0.2)).unwrap();
        assert!((w.point - Complex64::new(3f64.log2(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn cantor_search_matches_lattice_formula() {
        let model = cantor_spray();
        let zeros = find_complex_dimensions(&model, 12.0, None).unwrap();
        assert_eq!(zeros.len(), 5);
        let d = 2f64.ln() / 3f64.ln();
        let p = 2.0 * PI / 3f64.ln();
        for (z, k) in zeros.iter().zip(-2..=2) {
            assert!((z.point - Complex64::new(d, k as f64 * p)).norm() < 1e-9);
            assert_eq!(z.multiplicity, 1);
        }
    }

    #[test]
    fn nonlattice_zeros_are_complete_and_accurate() {
        let r = ratios(&[0.5, 1.0 / 3.0]);
        let zeros = find_zeros(&r, 20.0, None).unwrap();
        let window = search_window(&r, 20.0, None).unwrap();
        let total: u32 = zeros.iter().map(|z| z.multiplicity).sum();
        assert_eq!(total, count_zeros_rectangle(&r, window).unwrap());
        assert!(zeros.iter().all(|z| z.residual < RESIDUAL_LIMIT));

        let d = similarity_dimension(&r).value;
        let real: Vec<_> = zeros.iter().filter(|z| z.im().abs() < 1e-9).collect();
        assert_eq!(real.len(), 1);
        assert!((real[0].re() - d).abs() < 1e-10);
        assert!((d - 0.7879).abs() < 1e-4);

        for z in &zeros {
            assert!(z.re() <= d + 1e-9);
            let mirrored = zeros.iter().any(|w| (w.point - z.point.conj()).norm() < 1e-8);
            assert!(mirrored, "no conjugate for {}", z.point);
        }
    }

    #[test]
    fn lattice_with_negative_real_family() {
        let r = ratios(&[0.25, 1.0 / 16.0]);
        let zeros = find_zeros(&r, 5.0, None).unwrap();
        assert_eq!(zeros.len(), 5);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let shift = golden.ln() / 4f64.ln();
        let left: Vec<_> = zeros.iter().filter(|z| z.re() < 0.0).collect();
        assert_eq!(left.len(), 2);
        for z in left {
            assert!((z.re() + shift).abs() < 1e-10);
            assert!((z.im().abs() - PI / 4f64.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_window() {
        let model = cantor_spray();
        assert!(find_complex_dimensions(&model, 0.0, None).is_err());
        assert!(find_complex_dimensions(&model, f64::NAN, None).is_err());
    }

    #[test]
    fn dedup_merges_near_duplicates() {
        let z = |re: f64, im: f64| ComplexDimension {
            point: Complex64::new(re, im),
            multiplicity: 1,
            residual: 0.0,
        };
        let out = sort_and_dedup(vec![z(0.5, 1.0), z(0.5 + 1e-10, 1.0), z(0.1, -1.0)]);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].im(), -1.0);
    }
}
