//! Residues of `ε^{n-s} N(s) / (1 - Σ r_j^s)` and their truncated sum.
//!
//! Closing the inversion line `Re s = c`, `D < c < n`, to the left picks up
//! the poles at `0, …, n-1` and at every complex dimension. The pole of `N`
//! at `s = n` lies to the right of the line and is never part of the sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::numerator::MellinNumerator;
use crate::dimensions::{find_complex_dimensions, ComplexDimension, DirichletPolynomial, RESIDUAL_LIMIT};
use crate::direct::direct_tube_volume;
use crate::error::{Result, TubeError};
use crate::model::SprayModel;
use crate::summation::{CompensatedSum, ComplexSum};

/// `|f'(ω)|` below which a zero is treated as non-simple.
pub const SIMPLE_ZERO_DERIVATIVE: f64 = 1e-8;

/// Largest contour radius used by the fallback.
pub const MAX_CONTOUR_RADIUS: f64 = 0.1;

/// Fallback radius as a fraction of the distance to the nearest other pole.
pub const CONTOUR_RADIUS_FRACTION: f64 = 0.4;

/// Relative agreement of successive contour refinements.
pub const CONTOUR_TOLERANCE: f64 = 1e-10;

/// Maximum number of node doublings on a contour.
pub const MAX_REFINEMENTS: u32 = 20;

/// Largest pair count [`complex_dimensions_for_pairs`] will search for.
pub const MAX_PAIRS: usize = 100_000;

/// Tolerance for matching a zero with its mirror image below the real axis.
pub const CONJUGATE_MATCH: f64 = 1e-8;

/// Zeros with `|Im ω|` below this are treated as real.
const REAL_AXIS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidueKind {
    IntegerPole,
    SimpleZero,
    ContourFallback,
}

/// One summand of the residue tube formula at a fixed `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueTerm {
    pub location: Complex64,
    pub value: Complex64,
    pub kind: ResidueKind,
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(TubeError::Domain(format!("epsilon {eps} must be positive")));
    }
    Ok(())
}

/// `ε^{n-s}` for complex `s`.
fn eps_power(eps: f64, n: usize, s: Complex64) -> Complex64 {
    ((n as f64 - s) * eps.ln()).exp()
}

/// `κ_i / (1 - Σ r_j^i)`, the coefficient of `ε^{n-i}` in the expansion.
fn integer_pole_coefficient(model: &SprayModel, i: usize) -> f64 {
    let k = model.generator().coefficient(i);
    if k == 0.0 {
        return 0.0;
    }
    k / (1.0 - model.ratios().power_sum(i as f64))
}

/// Residue at the simple pole `s = i`: `ε^{n-i} κ_i / (1 - Σ r_j^i)`.
pub fn integer_pole_residue(model: &SprayModel, i: usize, eps: f64) -> f64 {
    let coefficient = integer_pole_coefficient(model, i);
    if coefficient == 0.0 {
        return 0.0;
    }
    eps.powi((model.dimension() - i) as i32) * coefficient
}

/// Sum of all integer-pole residues at `ε`.
pub fn integer_pole_sum(model: &SprayModel, eps: f64) -> f64 {
    (0..model.dimension()).map(|i| integer_pole_residue(model, i, eps)).collect::<CompensatedSum>().value()
}

/// Residue at a complex dimension, with only the integer poles `0..=n` as
/// neighbours for the fallback radius.
pub fn zero_residue(model: &SprayModel, zero: &ComplexDimension, eps: f64) -> Result<ResidueTerm> {
    zero_residue_with_neighbors(model, zero, &[], eps)
}

/// Residue at a complex dimension.
///
/// Simple zeros use `ε^{n-ω} N(ω) / f'(ω)`. Multiple zeros and zeros with
/// `|f'(ω)| <` [`SIMPLE_ZERO_DERIVATIVE`] are integrated on a circle whose
/// radius is `min(0.4·d, 0.1)`, with `d` the distance to the nearest of
/// `neighbors` and the integer poles.
pub fn zero_residue_with_neighbors(
    model: &SprayModel,
    zero: &ComplexDimension,
    neighbors: &[Complex64],
    eps: f64,
) -> Result<ResidueTerm> {
    check_epsilon(eps)?;
    let coefficient = zero_coefficient(model, zero, neighbors)?;
    coefficient.term(model, zero.point, eps)
}

#[derive(Debug, Clone, Copy)]
enum Coefficient {
    Simple(Complex64),
    Contour { radius: f64 },
}

impl Coefficient {
    fn term(&self, model: &SprayModel, at: Complex64, eps: f64) -> Result<ResidueTerm> {
        Ok(match *self {
            Coefficient::Simple(c) => ResidueTerm {
                location: at,
                value: c * eps_power(eps, model.dimension(), at),
                kind: ResidueKind::SimpleZero,
            },
            Coefficient::Contour { radius } => ResidueTerm {
                location: at,
                value: contour_residue(model, at, radius, eps)?,
                kind: ResidueKind::ContourFallback,
            },
        })
    }
}

fn zero_coefficient(
    model: &SprayModel,
    zero: &ComplexDimension,
    neighbors: &[Complex64],
) -> Result<Coefficient> {
    if !(zero.residual < RESIDUAL_LIMIT) {
        return Err(TubeError::Precondition(format!(
            "zero {} has residual {:e}, not below {RESIDUAL_LIMIT:e}",
            zero.point, zero.residual
        )));
    }
    let poly = DirichletPolynomial::new(model.ratios());
    let df = poly.derivative(zero.point);
    if zero.multiplicity == 1 && df.norm() >= SIMPLE_ZERO_DERIVATIVE {
        let num = MellinNumerator::new(model.generator()).eval(zero.point)?;
        return Ok(Coefficient::Simple(num / df));
    }
    let n = model.dimension();
    let distance = neighbors
        .iter()
        .copied()
        .chain((0..=n).map(|i| Complex64::new(i as f64, 0.0)))
        .map(|p| (p - zero.point).norm())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    Ok(Coefficient::Contour { radius: (CONTOUR_RADIUS_FRACTION * distance).min(MAX_CONTOUR_RADIUS) })
}

/// `(1/2πi) ∮ ε^{n-s} N(s) / (1 - Σ r_j^s) ds` over the circle `|s - center| = radius`.
///
/// The periodic trapezoid rule starts at 32 nodes and doubles until two
/// successive values agree to [`CONTOUR_TOLERANCE`] relative.
pub fn contour_residue(model: &SprayModel, center: Complex64, radius: f64, eps: f64) -> Result<Complex64> {
    check_epsilon(eps)?;
    if !radius.is_finite() || radius <= 0.0 {
        return Err(TubeError::Domain(format!("contour radius {radius} must be positive")));
    }
    let num = MellinNumerator::new(model.generator());
    let poly = DirichletPolynomial::new(model.ratios());
    let n = model.dimension();
    // With s = center + ρ e^{iθ}, ds/(2πi) = ρ e^{iθ} dθ / 2π.
    let integrand = |theta: f64| {
        let offset = Complex64::from_polar(radius, theta);
        let s = center + offset;
        eps_power(eps, n, s) * num.eval_unchecked(s) / poly.eval(s) * offset
    };
    let mut nodes = 32usize;
    let mut sum = ComplexSum::new();
    let mut scale = 0.0f64;
    for k in 0..nodes {
        let v = integrand(2.0 * PI * k as f64 / nodes as f64);
        scale = scale.max(v.norm());
        sum.add(v);
    }
    let mut previous = sum.value() / nodes as f64;
    for _ in 0..MAX_REFINEMENTS {
        for k in 0..nodes {
            let v = integrand(2.0 * PI * (k as f64 + 0.5) / nodes as f64);
            scale = scale.max(v.norm());
            sum.add(v);
        }
        nodes *= 2;
        let current = sum.value() / nodes as f64;
        if !current.re.is_finite() || !current.im.is_finite() {
            return Err(TubeError::Convergence(format!(
                "contour around {center} of radius {radius} meets a singularity"
            )));
        }
        if (current - previous).norm() <= CONTOUR_TOLERANCE * current.norm() + 1e-14 * scale {
            return Ok(current);
        }
        previous = current;
    }
    Err(TubeError::Convergence(format!(
        "contour around {center} of radius {radius} did not settle after {MAX_REFINEMENTS} refinements"
    )))
}

/// A residue expansion truncated to a fixed number of conjugate pairs,
/// reusable across many values of `ε`.
#[derive(Debug, Clone)]
pub struct ResidueExpansion {
    model: SprayModel,
    integer: Vec<(usize, f64)>,
    real: Vec<(Complex64, Coefficient)>,
    pairs: Vec<[(Complex64, Coefficient); 2]>,
    window: f64,
}

impl ResidueExpansion {
    /// Uses the real zeros and the `pairs` conjugate pairs of smallest
    /// `|Im ω|` among `zeros`, which were searched up to `|Im| ≤ window`.
    pub fn new(model: &SprayModel, zeros: &[ComplexDimension], pairs: usize, window: f64) -> Result<Self> {
        let n = model.dimension();
        let neighbors: Vec<Complex64> = zeros.iter().map(|z| z.point).collect();
        let coefficient = |z: &ComplexDimension| zero_coefficient(model, z, &neighbors);

        let mut real = Vec::new();
        let mut upper: Vec<&ComplexDimension> = Vec::new();
        let mut lower: Vec<&ComplexDimension> = Vec::new();
        for z in zeros {
            if z.im().abs() <= REAL_AXIS {
                real.push((z.point, coefficient(z)?));
            } else if z.im() > 0.0 {
                upper.push(z);
            } else {
                lower.push(z);
            }
        }
        if upper.len() < pairs {
            return Err(TubeError::Window(format!(
                "{pairs} pairs requested but only {} zeros lie in 0 < Im ≤ {window}",
                upper.len()
            )));
        }
        upper.sort_by(|a, b| a.im().total_cmp(&b.im()).then(a.re().total_cmp(&b.re())));
        lower.sort_by(|a, b| a.im().total_cmp(&b.im()).then(a.re().total_cmp(&b.re())));
        let mut used = vec![false; lower.len()];
        let mut paired = Vec::with_capacity(pairs);
        for z in upper.into_iter().take(pairs) {
            let target = z.point.conj();
            let start = lower.partition_point(|w| w.im() < target.im - CONJUGATE_MATCH);
            let mirror = (start..lower.len())
                .take_while(|&k| lower[k].im() <= target.im + CONJUGATE_MATCH)
                .filter(|&k| !used[k])
                .min_by(|&a, &b| {
                    (lower[a].point - target).norm().total_cmp(&(lower[b].point - target).norm())
                })
                .filter(|&k| (lower[k].point - target).norm() <= CONJUGATE_MATCH)
                .ok_or_else(|| {
                    TubeError::Window(format!("no conjugate partner for the zero {}", z.point))
                })?;
            used[mirror] = true;
            let w = lower[mirror];
            paired.push([(z.point, coefficient(z)?), (w.point, coefficient(w)?)]);
        }
        let integer = (0..n).map(|i| (i, integer_pole_coefficient(model, i))).collect();
        Ok(Self { model: model.clone(), integer, real, pairs: paired, window })
    }

    pub fn pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// All residue terms at `ε` in summation order: integer poles, real
    /// zeros, then each pair upper member first.
    pub fn terms(&self, eps: f64) -> Result<Vec<ResidueTerm>> {
        check_epsilon(eps)?;
        let n = self.model.dimension();
        let mut out = Vec::with_capacity(n + self.real.len() + 2 * self.pairs.len());
        for &(i, c) in &self.integer {
            out.push(ResidueTerm {
                location: Complex64::new(i as f64, 0.0),
                value: Complex64::new(c * eps.powi((n - i) as i32), 0.0),
                kind: ResidueKind::IntegerPole,
            });
        }
        for &(at, c) in &self.real {
            out.push(c.term(&self.model, at, eps)?);
        }
        for pair in &self.pairs {
            for &(at, c) in pair {
                out.push(c.term(&self.model, at, eps)?);
            }
        }
        Ok(out)
    }

    /// Partial sums for `K' = 0..=K` pairs at `ε < g`.
    pub fn evaluate(&self, eps: f64) -> Result<TubeEvaluation> {
        check_epsilon(eps)?;
        let g = self.model.generator().inradius();
        if eps >= g {
            return Err(TubeError::Domain(format!(
                "residue formula stated only for ε < g (ε = {eps}, g = {g})"
            )));
        }
        let terms = self.terms(eps)?;
        let head = self.integer.len() + self.real.len();
        let mut sum = ComplexSum::new();
        let mut partial_sums = Vec::with_capacity(self.pairs.len() + 1);
        let mut im_leakage = 0.0f64;
        let mut record = |z: Complex64, partial_sums: &mut Vec<f64>| {
            partial_sums.push(z.re);
            let leak = if z.re == 0.0 { z.im.abs() } else { (z.im / z.re).abs() };
            im_leakage = im_leakage.max(leak);
        };
        for t in &terms[..head] {
            sum.add(t.value);
        }
        record(sum.value(), &mut partial_sums);
        for pair in terms[head..].chunks(2) {
            sum.add(pair[0].value);
            sum.add(pair[1].value);
            record(sum.value(), &mut partial_sums);
        }
        Ok(TubeEvaluation {
            epsilon: eps,
            direct: None,
            partial_sums,
            im_leakage,
            window: self.window,
            pairs_used: self.pairs.len(),
        })
    }
}

/// Residue partial sums at one `ε`, optionally with the direct value.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeEvaluation {
    pub epsilon: f64,
    pub direct: Option<f64>,
    /// `partial_sums[k]`: integer poles, real zeros and the first `k` pairs.
    pub partial_sums: Vec<f64>,
    /// Largest `|Im| / |Re|` over all partial sums.
    pub im_leakage: f64,
    pub window: f64,
    pub pairs_used: usize,
}

impl TubeEvaluation {
    /// The partial sum with all pairs included.
    pub fn residues(&self) -> f64 {
        *self.partial_sums.last().expect("at least the K = 0 partial sum")
    }

    pub fn abs_error(&self) -> Option<f64> {
        self.error_at(self.pairs_used)
    }

    pub fn rel_error(&self) -> Option<f64> {
        Some(self.abs_error()? / self.direct?.abs())
    }

    /// `|partial_sums[k] - direct|`.
    pub fn error_at(&self, k: usize) -> Option<f64> {
        Some((self.partial_sums.get(k)? - self.direct?).abs())
    }
}

/// Complex dimensions covering at least `pairs` conjugate pairs, with the
/// window used.
///
/// The first window assumes one pair per `2π / ln(1/r_min)` of height,
/// which is exact for single-family lattice lists; it grows by 25% until
/// enough zeros are found.
pub fn complex_dimensions_for_pairs(model: &SprayModel, pairs: usize) -> Result<(Vec<ComplexDimension>, f64)> {
    if pairs > MAX_PAIRS {
        return Err(TubeError::Resource { what: "conjugate pairs", count: pairs as u64, limit: MAX_PAIRS as u64 });
    }
    let spacing = 2.0 * PI / (1.0 / model.ratios().min()).ln();
    let mut window = (pairs as f64 + 1.0) * spacing * 1.05 + 1.0;
    loop {
        let zeros = find_complex_dimensions(model, window, None)?;
        if zeros.iter().filter(|z| z.im() > REAL_AXIS).count() >= pairs {
            return Ok((zeros, window));
        }
        window *= 1.25;
    }
}

/// The residue tube formula at `ε < g` with `pairs` conjugate pairs, from
/// the zeros in `|Im| ≤ window`. The direct value is attached.
pub fn tube_volume_residues(model: &SprayModel, eps: f64, pairs: usize, window: f64) -> Result<TubeEvaluation> {
    check_epsilon(eps)?;
    let g = model.generator().inradius();
    if eps >= g {
        return Err(TubeError::Domain(format!(
            "residue formula stated only for ε < g (ε = {eps}, g = {g})"
        )));
    }
    let zeros = find_complex_dimensions(model, window, None)?;
    let expansion = ResidueExpansion::new(model, &zeros, pairs, window)?;
    let mut out = expansion.evaluate(eps)?;
    out.direct = Some(direct_tube_volume(model, eps)?);
    Ok(out)
}

/// One row of [`compare`]: both columns fail independently.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub epsilon: f64,
    pub direct: Result<f64>,
    pub residues: Result<TubeEvaluation>,
}

/// Direct and residue values over a grid of `ε`.
///
/// Zeros are computed once, for `window` if given and otherwise just
/// enough to cover `pairs`. Rows are evaluated in parallel but each row's
/// partial sums are serial, so the output does not depend on thread count.
pub fn compare(model: &SprayModel, grid: &[f64], pairs: usize, window: Option<f64>) -> Result<Vec<ComparisonRow>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let (zeros, window) = match window {
        Some(w) => (find_complex_dimensions(model, w, None)?, w),
        None => complex_dimensions_for_pairs(model, pairs)?,
    };
    let expansion = ResidueExpansion::new(model, &zeros, pairs, window)?;
    Ok(grid
        .par_iter()
        .map(|&eps| {
            let direct = direct_tube_volume(model, eps);
            let residues = expansion.evaluate(eps).map(|mut e| {
                e.direct = direct.as_ref().ok().copied();
                e
            });
            ComparisonRow { epsilon: eps, direct, residues }
        })
        .collect())
}
