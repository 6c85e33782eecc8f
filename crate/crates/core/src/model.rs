//! Input data: ratio lists, monophase generators and the sprays built from them.
//!
//! Constructors check structure only (finite numbers, lengths, signs). The
//! standing assumptions that make the tube formulas valid are checked by
//! [`SprayModel::validate`], which reports every violation at once.

use std::fmt;

use crate::error::{Result, TubeError};
use crate::moran;

/// Relative tolerance for the continuity condition at the inradius.
pub const CONTINUITY_TOLERANCE: f64 = 1e-12;

/// Number of interior points on which the derivative of the generator
/// polynomial is sampled for the monotonicity check.
pub const MONOTONICITY_SAMPLES: usize = 1024;

/// Scaling ratios `r_1..r_J`, each strictly inside `(0, 1)`.
///
/// Ratios are stored in descending order. Duplicates are kept: they are
/// multiplicities of the Moran equation, not redundant entries. Storing a
/// canonical order makes every computation independent of the order the
/// caller supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioList {
    ratios: Vec<f64>,
}

impl RatioList {
    pub fn new(mut ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(TubeError::InvalidInput("ratio list is empty".into()));
        }
        for &r in &ratios {
            if !r.is_finite() || r <= 0.0 || r >= 1.0 {
                return Err(TubeError::InvalidInput(format!(
                    "ratio {r} is not strictly inside (0, 1)"
                )));
            }
        }
        ratios.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { ratios })
    }

    /// Ratios in descending order.
    pub fn as_slice(&self) -> &[f64] {
        &self.ratios
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.ratios[0]
    }

    pub fn min(&self) -> f64 {
        self.ratios[self.ratios.len() - 1]
    }

    /// Distinct ratio values in descending order with their multiplicities.
    pub fn distinct(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &r in &self.ratios {
            match out.last_mut() {
                Some((v, m)) if *v == r => *m += 1,
                _ => out.push((r, 1)),
            }
        }
        out
    }

    /// `Σ r_j^n`.
    pub fn power_sum(&self, n: f64) -> f64 {
        moran::real_dirichlet_sum(self, n)
    }
}

/// A generator whose inner tube volume is one polynomial up to the inradius:
///
/// `V_G(ε) = Σ_{i<n} κ_i ε^{n-i}` for `ε < g`, and `Vol(G)` for `ε ≥ g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonophaseGenerator {
    dimension: usize,
    kappa: Vec<f64>,
    inradius: f64,
    volume: f64,
}

impl MonophaseGenerator {
    /// `kappa[i]` multiplies `ε^{n-i}`, for `i = 0..n-1`.
    pub fn new(dimension: usize, kappa: Vec<f64>, inradius: f64, volume: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(TubeError::InvalidInput("dimension must be at least 1".into()));
        }
        if kappa.len() != dimension {
            return Err(TubeError::InvalidInput(format!(
                "kappa has {} coefficients, dimension {dimension} needs {dimension}",
                kappa.len()
            )));
        }
        if let Some(k) = kappa.iter().find(|k| !k.is_finite()) {
            return Err(TubeError::InvalidInput(format!("kappa coefficient {k} is not finite")));
        }
        if !inradius.is_finite() || inradius <= 0.0 {
            return Err(TubeError::InvalidInput(format!("inradius {inradius} must be positive")));
        }
        if !volume.is_finite() || volume <= 0.0 {
            return Err(TubeError::InvalidInput(format!("volume {volume} must be positive")));
        }
        Ok(Self { dimension, kappa, inradius, volume })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `κ_i` for `i = 0..=n`, with the convention `κ_n = -Vol(G)`.
    pub fn coefficient(&self, i: usize) -> f64 {
        match i.cmp(&self.dimension) {
            std::cmp::Ordering::Less => self.kappa[i],
            std::cmp::Ordering::Equal => -self.volume,
            std::cmp::Ordering::Greater => 0.0,
        }
    }

    /// The tube polynomial `Σ κ_i ε^{n-i}` without the cut at the inradius.
    pub fn polynomial(&self, eps: f64) -> f64 {
        let n = self.dimension;
        // Horner in ε: κ_0 ε^n + ... + κ_{n-1} ε = ε (κ_{n-1} + ε (κ_{n-2} + ...)).
        let inner = self.kappa.iter().fold(0.0, |acc, &k| acc * eps + k);
        debug_assert_eq!(self.kappa.len(), n);
        inner * eps
    }

    /// Derivative of the tube polynomial.
    pub fn polynomial_derivative(&self, eps: f64) -> f64 {
        let n = self.dimension;
        self.kappa
            .iter()
            .enumerate()
            .fold(0.0, |acc, (i, &k)| acc * eps + k * (n - i) as f64)
    }

    /// Inner ε-tube volume of the generator.
    pub fn tube_volume(&self, eps: f64) -> Result<f64> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(TubeError::Domain(format!("epsilon {eps} must be positive")));
        }
        Ok(self.tube_volume_unchecked(eps))
    }

    #[inline]
    pub(crate) fn tube_volume_unchecked(&self, eps: f64) -> f64 {
        if eps >= self.inradius {
            self.volume
        } else {
            self.polynomial(eps)
        }
    }

    /// `Σ κ_i g^{n-i} - Vol(G)`; zero for a continuous tube function.
    pub fn continuity_defect(&self) -> f64 {
        self.polynomial(self.inradius) - self.volume
    }

    /// Smallest sampled value of the derivative on `[0, g]`.
    pub fn min_sampled_derivative(&self) -> f64 {
        let g = self.inradius;
        let steps = MONOTONICITY_SAMPLES + 1;
        (0..=steps)
            .map(|k| self.polynomial_derivative(g * k as f64 / steps as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// The same shape scaled by `c`: `g → cg`, `Vol → c^n Vol`, `κ_i → c^i κ_i`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let kappa = self
            .kappa
            .iter()
            .enumerate()
            .map(|(i, k)| k * c.powi(i as i32))
            .collect();
        Self::new(
            self.dimension,
            kappa,
            self.inradius * c,
            self.volume * c.powi(self.dimension as i32),
        )
    }
}

/// A ratio list together with its generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayModel {
    ratios: RatioList,
    generator: MonophaseGenerator,
}

impl SprayModel {
    pub fn new(ratios: RatioList, generator: MonophaseGenerator) -> Self {
        Self { ratios, generator }
    }

    /// Build and validate in one step.
    pub fn checked(
        ratios: RatioList,
        generator: MonophaseGenerator,
        options: ValidationOptions,
    ) -> Result<Self> {
        let model = Self::new(ratios, generator);
        let report = model.validate(options);
        if report.passed() {
            Ok(model)
        } else {
            Err(TubeError::Validation(report))
        }
    }

    pub fn ratios(&self) -> &RatioList {
        &self.ratios
    }

    pub fn generator(&self) -> &MonophaseGenerator {
        &self.generator
    }

    pub fn dimension(&self) -> usize {
        self.generator.dimension
    }

    /// `Σ r_j^n`.
    pub fn volume_ratio_sum(&self) -> f64 {
        self.ratios.power_sum(self.dimension() as f64)
    }

    /// `Vol(G) / (1 - Σ r_j^n)`: the tube volume for every `ε ≥ g`.
    pub fn total_volume(&self) -> Result<f64> {
        let s = self.volume_ratio_sum();
        if s >= 1.0 {
            return Err(TubeError::Divergence { power_sum: s });
        }
        Ok(self.generator.volume / (1.0 - s))
    }

    /// Check every standing assumption and report all violations.
    pub fn validate(&self, options: ValidationOptions) -> ValidationReport {
        let mut violations = Vec::new();
        let gen = &self.generator;
        let n = gen.dimension;

        let defect = gen.continuity_defect();
        if defect.abs() > CONTINUITY_TOLERANCE * gen.volume {
            violations.push(Violation::Continuity {
                polynomial_at_inradius: gen.polynomial(gen.inradius),
                volume: gen.volume,
            });
        }

        if options.check_monotonicity {
            let scale = gen.volume / gen.inradius;
            let min_slope = gen.min_sampled_derivative();
            if min_slope < -CONTINUITY_TOLERANCE * scale {
                violations.push(Violation::NotMonotone { min_slope });
            }
        }

        let power_sum = self.volume_ratio_sum();
        if power_sum >= 1.0 {
            violations.push(Violation::InfiniteVolume { power_sum, dimension: n });
        }

        let d = moran::similarity_dimension(&self.ratios).value;
        if !(d > (n as f64 - 1.0) && d < n as f64) {
            violations.push(Violation::DimensionOutOfRange { similarity_dimension: d, dimension: n });
        }

        ValidationReport { violations }
    }
}

/// Which optional checks [`SprayModel::validate`] runs.
#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub check_monotonicity: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { check_monotonicity: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Continuity { polynomial_at_inradius: f64, volume: f64 },
    NotMonotone { min_slope: f64 },
    InfiniteVolume { power_sum: f64, dimension: usize },
    DimensionOutOfRange { similarity_dimension: f64, dimension: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Continuity { polynomial_at_inradius, volume } => write!(
                f,
                "continuity at g violated: sum kappa_i g^(n-i) = {polynomial_at_inradius} != volume {volume}"
            ),
            Violation::NotMonotone { min_slope } => write!(
                f,
                "generator tube volume decreases on (0, g]: derivative reaches {min_slope}"
            ),
            Violation::InfiniteVolume { power_sum, dimension } => {
                if *power_sum == 1.0 {
                    write!(f, "sum r_j^{dimension} = 1, total volume infinite")
                } else {
                    write!(f, "sum r_j^{dimension} = {power_sum} > 1, total volume infinite")
                }
            }
            Violation::DimensionOutOfRange { similarity_dimension, dimension } => write!(
                f,
                "similarity dimension {similarity_dimension} not in ({}, {dimension})",
                *dimension as f64 - 1.0
            ),
        }
    }
}

/// Outcome of [`SprayModel::validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "fail: {v}")?;
        }
        Ok(())
    }
}

/// Reference models used by the examples, the self-test and the tests.
pub mod models {
    use super::*;

    /// Unit interval minus its middle third, as a generator in ℝ¹:
    /// an open interval of length 1/3, so `V_G(ε) = 2ε` up to `g = 1/6`.
    pub fn cantor_interval() -> MonophaseGenerator {
        MonophaseGenerator::new(1, vec![2.0], 1.0 / 6.0, 1.0 / 3.0).expect("valid generator")
    }

    /// The open unit square: `V_G(ε) = 4ε - 4ε²` up to `g = 1/2`.
    pub fn unit_square() -> MonophaseGenerator {
        MonophaseGenerator::new(2, vec![-4.0, 4.0], 0.5, 1.0).expect("valid generator")
    }

    /// Middle-third Cantor spray: ratios {1/3, 1/3} with the Cantor interval generator.
    pub fn cantor_spray() -> SprayModel {
        let ratios = RatioList::new(vec![1.0 / 3.0, 1.0 / 3.0]).expect("valid ratios");
        SprayModel::new(ratios, cantor_interval())
    }

    /// Unit square with the nonlattice ratio list {1/2, 1/3, 1/4}.
    pub fn square_spray() -> SprayModel {
        let ratios = RatioList::new(vec![0.5, 1.0 / 3.0, 0.25]).expect("valid ratios");
        SprayModel::new(ratios, unit_square())
    }
}
