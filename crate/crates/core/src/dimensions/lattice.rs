//! Lattice ratio lists: every `r_j` is an integer power of one base `r`.
//!
//! With `z = r^s` the equation `1 - Σ r_j^s = 0` becomes the polynomial
//! `1 - Σ z^{k_j} = 0`, and each root `z_m` gives the vertical family
//! `s = ln z_m / ln r + i k p`, `p = 2π / ln(1/r)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ComplexDimension, DirichletPolynomial, RESIDUAL_LIMIT};
use crate::error::{Result, TubeError};
use crate::model::RatioList;

/// Largest denominator accepted for `ln r_j / ln r_1`.
pub const MAX_DENOMINATOR: u64 = 64;

/// Reconstruction tolerance `|r^{k_j} - r_j|`.
pub const LATTICE_TOLERANCE: f64 = 1e-9;

/// Roots closer than this (relative) are merged into one multiple root.
const ROOT_CLUSTER: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeStructure {
    Lattice {
        /// Common base `r ∈ (0, 1)`.
        base: f64,
        /// `k_j` with `r_j = r^{k_j}`, aligned with [`RatioList::as_slice`]; gcd 1.
        exponents: Vec<u64>,
        /// `2π / ln(1/r)`.
        period: f64,
    },
    Nonlattice,
}

impl LatticeStructure {
    pub fn is_lattice(&self) -> bool {
        matches!(self, LatticeStructure::Lattice { .. })
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            LatticeStructure::Lattice { period, .. } => Some(*period),
            LatticeStructure::Nonlattice => None,
        }
    }
}

/// Last continued-fraction convergent of `x > 0` with denominator `≤ max_den`.
fn convergent(x: f64, max_den: u64) -> (u64, u64) {
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut best = (x.round().max(1.0) as u64, 1u64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        if k_next > max_den {
            break;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        best = (h, k);
        let frac = y - y.floor();
        if frac < 1e-12 {
            break;
        }
        y = 1.0 / frac;
    }
    best
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Decide whether the ratios share a common base.
pub fn detect_lattice(ratios: &RatioList) -> LatticeStructure {
    let r = ratios.as_slice();
    let ln_first = r[0].ln();
    let fractions: Vec<(u64, u64)> = r
        .iter()
        .map(|rj| convergent(rj.ln() / ln_first, MAX_DENOMINATOR))
        .collect();

    let mut common = 1u64;
    for &(_, q) in &fractions {
        common = common / gcd(common, q) * q;
        if common > MAX_DENOMINATOR {
            return LatticeStructure::Nonlattice;
        }
    }
    let mut exponents: Vec<u64> = fractions.iter().map(|&(p, q)| p * (common / q)).collect();
    let g = exponents.iter().fold(0, |acc, &k| gcd(acc, k));
    if g == 0 {
        return LatticeStructure::Nonlattice;
    }
    for k in &mut exponents {
        *k /= g;
    }

    // Least-squares base from all ratios.
    let num: f64 = exponents.iter().zip(r).map(|(&k, rj)| k as f64 * rj.ln()).sum();
    let den: f64 = exponents.iter().map(|&k| (k * k) as f64).sum();
    let ln_base = num / den;
    let fits = exponents
        .iter()
        .zip(r)
        .all(|(&k, rj)| ((k as f64 * ln_base).exp() - rj).abs() < LATTICE_TOLERANCE);
    if !fits {
        return LatticeStructure::Nonlattice;
    }
    LatticeStructure::Lattice {
        base: ln_base.exp(),
        exponents,
        period: 2.0 * PI / -ln_base,
    }
}

/// Roots of `Σ c_k z^k` (coefficients in ascending order) with multiplicities.
pub(crate) fn polynomial_roots(coeffs: &[f64]) -> Vec<(Complex64, u32)> {
    let degree = coeffs.len() - 1;
    let lead = coeffs[degree];
    let raw: Vec<Complex64> = if degree == 1 {
        vec![Complex64::new(-coeffs[0] / lead, 0.0)]
    } else {
        let mut companion = DMatrix::<f64>::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..degree {
            companion[(i, degree - 1)] = -coeffs[i] / lead;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    };

    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };

    // Cluster near-coincident eigenvalues into multiple roots.
    let mut clusters: Vec<(Vec<Complex64>, Complex64)> = Vec::new();
    for z in raw {
        match clusters
            .iter_mut()
            .find(|(_, c)| (z - *c).norm() < ROOT_CLUSTER * c.norm().max(1.0))
        {
            Some((members, c)) => {
                members.push(z);
                *c = members.iter().sum::<Complex64>() / members.len() as f64;
            }
            None => clusters.push((vec![z], z)),
        }
    }

    clusters
        .into_iter()
        .map(|(members, mut z)| {
            let m = members.len() as u32;
            if m == 1 {
                for _ in 0..20 {
                    let (p, dp) = eval(z);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let step = p / dp;
                    z -= step;
                    if step.norm() <= f64::EPSILON * z.norm() {
                        break;
                    }
                }
            }
            (z, m)
        })
        .collect()
}

/// All zeros with `|Im s| ≤ T` of a lattice ratio list.
pub fn lattice_zeros(
    structure: &LatticeStructure,
    ratios: &RatioList,
    im_window: f64,
) -> Result<Vec<ComplexDimension>> {
    let LatticeStructure::Lattice { base, exponents, period } = structure else {
        return Err(TubeError::Precondition("ratio list is not lattice".into()));
    };
    let degree = *exponents.iter().max().expect("nonempty") as usize;
    let mut coeffs = vec![0.0; degree + 1];
    coeffs[0] = 1.0;
    for &k in exponents {
        coeffs[k as usize] -= 1.0;
    }

    let poly = DirichletPolynomial::new(ratios);
    let ln_base = base.ln();
    let mut out = Vec::new();
    for (z, multiplicity) in polynomial_roots(&coeffs) {
        let principal = z.ln() / ln_base;
        let k_lo = ((-im_window - principal.im) / period).ceil() as i64;
        let k_hi = ((im_window - principal.im) / period).floor() as i64;
        for k in k_lo..=k_hi {
            let mut point = principal + Complex64::new(0.0, k as f64 * period);
            let mut residual = poly.eval(point).norm();
            if multiplicity == 1 {
                for _ in 0..3 {
                    let (f, df) = poly.eval_with_derivative(point);
                    let candidate = point - f / df;
                    let r = poly.eval(candidate).norm();
                    if r < residual {
                        point = candidate;
                        residual = r;
                    } else {
                        break;
                    }
                }
            }
            if multiplicity == 1 && residual >= RESIDUAL_LIMIT {
                return Err(TubeError::Convergence(format!(
                    "lattice zero {point} has residual {residual:e}"
                )));
            }
            out.push(ComplexDimension { point, multiplicity, residual });
        }
    }
    Ok(out)
}
