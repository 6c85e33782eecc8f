//! Numerical inversion of the spray's Mellin transform along `Re s = c`.

use num_complex::Complex64;

use super::numerator::MellinNumerator;
use crate::dimensions::DirichletPolynomial;
use crate::error::{Result, TubeError};
use crate::model::SprayModel;
use crate::moran::similarity_dimension;
use crate::summation::CompensatedSum;

/// Intervals in the first trapezoid pass.
pub const INITIAL_INTERVALS: usize = 1024;

/// Interval count at which refinement gives up.
pub const MAX_INTERVALS: usize = 1 << 22;

/// Relative change between refinements accepted as converged.
pub const INVERSION_TOLERANCE: f64 = 1e-9;

/// `(D + n) / 2`, the midpoint of the strip of convergence.
pub fn default_abscissa(model: &SprayModel) -> f64 {
    0.5 * (similarity_dimension(model.ratios()).value + model.dimension() as f64)
}

/// `ε^n (1/2π) ∫_{-T}^{T} f̃(c+it) ε^{-(c+it)} dt` with `f̃ = N / (1 - Σ r_j^s)`.
///
/// The integrand at `-t` is the conjugate of that at `t`, so only `[0, T]`
/// is integrated. The trapezoid rule is refined by halving the step, with
/// one Richardson step applied to each pair of levels; refinement stops
/// once two extrapolated values agree to [`INVERSION_TOLERANCE`].
pub fn inverse_mellin_numeric(model: &SprayModel, eps: f64, c: f64, half_length: f64) -> Result<f64> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(TubeError::Domain(format!("epsilon {eps} must be positive")));
    }
    if !half_length.is_finite() || half_length <= 0.0 {
        return Err(TubeError::Domain(format!("half-length T = {half_length} must be positive")));
    }
    let d = similarity_dimension(model.ratios()).value;
    let n = model.dimension() as f64;
    if !(c > d && c < n) {
        return Err(TubeError::Strip { c, lower: d, upper: n });
    }
    let num = MellinNumerator::new(model.generator());
    let poly = DirichletPolynomial::new(model.ratios());
    let ln_eps = eps.ln();
    let integrand = |t: f64| {
        let s = Complex64::new(c, t);
        (num.eval_unchecked(s) / poly.eval(s) * (-s * ln_eps).exp()).re
    };

    let mut intervals = INITIAL_INTERVALS;
    let h0 = half_length / intervals as f64;
    let mut sum: CompensatedSum = (1..intervals).map(|k| integrand(k as f64 * h0)).collect();
    sum.add(0.5 * (integrand(0.0) + integrand(half_length)));
    let mut trapezoid = sum.value() * h0;
    let mut extrapolated: Option<f64> = None;
    while intervals < MAX_INTERVALS {
        let h = half_length / (2 * intervals) as f64;
        for k in 0..intervals {
            sum.add(integrand((2 * k + 1) as f64 * h));
        }
        intervals *= 2;
        let refined = sum.value() * h;
        let richardson = (4.0 * refined - trapezoid) / 3.0;
        if let Some(previous) = extrapolated {
            if (richardson - previous).abs() <= INVERSION_TOLERANCE * richardson.abs() + 1e-15 {
                return Ok(eps.powf(n) * richardson / std::f64::consts::PI);
            }
        }
        extrapolated = Some(richardson);
        trapezoid = refined;
    }
    Err(TubeError::Convergence(format!(
        "inversion integral at ε = {eps} not settled with {MAX_INTERVALS} intervals"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::direct_tube_volume;
    use crate::model::models::{cantor_spray, square_spray};

    #[test]
    fn cantor_examples() {
        let m = cantor_spray();
        let v = inverse_mellin_numeric(&m, 0.1, 0.8, 200.0).unwrap();
        assert!((v - 13.0 / 15.0).abs() < 1e-2, "{v}");
        let v = inverse_mellin_numeric(&m, 0.25, 0.8, 200.0).unwrap();
        assert!((v - 1.0).abs() < 1e-2, "{v}");
    }

    #[test]
    fn strip_is_enforced() {
        let m = cantor_spray();
        let d = 2f64.ln() / 3f64.ln();
        for c in [d, 1.0, 0.2, 1.5] {
            let err = inverse_mellin_numeric(&m, 0.1, c, 200.0).unwrap_err();
            assert!(matches!(err, TubeError::Strip { .. }), "{c}");
        }
    }

    #[test]
    fn square_matches_direct() {
        let m = square_spray();
        let c = default_abscissa(&m);
        for eps in [0.05, 0.2, 0.7] {
            let v = inverse_mellin_numeric(&m, eps, c, 200.0).unwrap();
            let direct = direct_tube_volume(&m, eps).unwrap();
            assert!((v - direct).abs() < 1e-2, "{eps}: {v} vs {direct}");
        }
    }
}
