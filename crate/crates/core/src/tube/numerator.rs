//! The Mellin transform of a monophase generator's tube function.

use num_complex::Complex64;

use crate::error::{Result, TubeError};
use crate::model::MonophaseGenerator;
use crate::quadrature;

/// Distance to an integer pole below which evaluation is refused.
pub const POLE_PROXIMITY: f64 = 1e-12;

/// `N(s) = Σ_{i=0}^{n} κ_i g^{s-i} / (s - i)` with `κ_n = -Vol(G)`.
///
/// For `n - 1 < Re s < n` this is `∫_0^∞ V_G(ε) ε^{s-n-1} dε`; elsewhere it
/// is the meromorphic continuation, with simple poles of residue `κ_i` at
/// every `i` where `κ_i ≠ 0`.
#[derive(Debug, Clone)]
pub struct MellinNumerator {
    coefficients: Vec<f64>,
    ln_g: f64,
}

impl MellinNumerator {
    pub fn new(generator: &MonophaseGenerator) -> Self {
        let n = generator.dimension();
        Self {
            coefficients: (0..=n).map(|i| generator.coefficient(i)).collect(),
            ln_g: generator.inradius().ln(),
        }
    }

    /// `κ_0, …, κ_n`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        for (i, &k) in self.coefficients.iter().enumerate() {
            if k != 0.0 && (s - i as f64).norm() < POLE_PROXIMITY {
                return Err(TubeError::PoleProximity { re: s.re, im: s.im, pole: i });
            }
        }
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, &k)| k != 0.0)
            .map(|(i, &k)| k * ((s - i as f64) * self.ln_g).exp() / (s - i as f64))
            .sum()
    }

    /// `κ_i`, the residue at `s = i`.
    pub fn residue(&self, i: usize) -> f64 {
        self.coefficients.get(i).copied().unwrap_or(0.0)
    }
}

/// `N(s)` for `generator`; see [`MellinNumerator`].
pub fn mellin_numerator(generator: &MonophaseGenerator, s: Complex64) -> Result<Complex64> {
    MellinNumerator::new(generator).eval(s)
}

/// `∫_0^∞ V_G(ε) ε^{s-n-1} dε` by adaptive quadrature, split at `g`.
///
/// Only defined in the strip `n - 1 < Re s < n`. Both halves are mapped to
/// `[0, ∞)` by `ε = g e^{∓u}` and truncated where the integrand has decayed
/// by `e^{-35}` relative to its value at `g`.
pub fn mellin_numerator_quadrature(generator: &MonophaseGenerator, s: Complex64) -> Result<Complex64> {
    let n = generator.dimension() as f64;
    if !(s.re > n - 1.0 && s.re < n) {
        return Err(TubeError::Strip { c: s.re, lower: n - 1.0, upper: n });
    }
    let g = generator.inradius();
    let vol = generator.volume();
    // ε^{s-n-1} dε = ε^{s-n} du along ε = g e^{∓u}.
    let weight = |eps: f64| (Complex64::new(eps.ln(), 0.0) * (s - n)).exp();
    let inner_decay = s.re - (n - 1.0);
    let outer_decay = n - s.re;
    let inner = quadrature::integrate(
        |u| {
            let eps = g * (-u).exp();
            generator.polynomial(eps) * weight(eps)
        },
        0.0,
        35.0 / inner_decay,
        1e-15,
        1e-12,
    )?;
    let outer = quadrature::integrate(
        |u| {
            let eps = g * u.exp();
            vol * weight(eps)
        },
        0.0,
        35.0 / outer_decay,
        1e-15,
        1e-12,
    )?;
    Ok(inner + outer)
}
