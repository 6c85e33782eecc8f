//! Built-in acceptance suite on the Cantor spray and the unit-square spray.
//!
//! Reports contain no timings, so two runs print the same bytes; runtime
//! budgets only decide pass or fail.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dimensions::{count_zeros_rectangle, find_complex_dimensions, find_zeros, search_window};
use crate::direct::{direct_tube_volume, dyadic_grid, functional_equation_residual, scaling_exponent_fit};
use crate::error::Result;
use crate::model::models::{cantor_spray, square_spray};
use crate::model::{RatioList, SprayModel};
use crate::moran::similarity_dimension;
use crate::tube::{
    complex_dimensions_for_pairs, default_abscissa, integer_pole_sum, inverse_mellin_numeric,
    mellin_numerator, mellin_numerator_quadrature, ResidueExpansion,
};

const SEED: u64 = 0x7475_6265_666f_7267;

/// Result of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, passed: true, details: Vec::new() }
    }

    /// Record a check; any failed check fails the criterion.
    fn check(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("     {detail}"));
    }

    fn budget(&mut self, elapsed: Duration, limit: Duration) {
        let ok = elapsed < limit;
        self.passed &= ok;
        if !ok {
            self.details.push(format!("FAIL runtime over the {limit:?} budget"));
        }
    }

    fn fail(&mut self, error: impl fmt::Display) {
        self.check(false, format!("error: {error}"));
    }

    /// One line: `criterion N: PASS|FAIL title`.
    pub fn summary(&self) -> String {
        format!("criterion {}: {} {}", self.id, if self.passed { "PASS" } else { "FAIL" }, self.title)
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for d in &self.details {
            writeln!(f, "    {d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub outcomes: Vec<CriterionOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            write!(f, "{o}")?;
        }
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        writeln!(f, "selftest: {passed}/{} criteria passed", self.outcomes.len())
    }
}

/// Every criterion, in order.
pub fn run() -> SelftestReport {
    let criteria: [fn() -> CriterionOutcome; 10] = [
        moran_closed_forms,
        lattice_zeros_exact,
        winding_completeness,
        functional_equation,
        constant_regime,
        mellin_numerator_identity,
        cantor_residue_agreement,
        nonlattice_residue_agreement,
        tube_scaling_exponent,
        inversion_cross_check,
    ];
    SelftestReport { outcomes: criteria.iter().map(|c| c()).collect() }
}

fn ratios(v: &[f64]) -> RatioList {
    RatioList::new(v.to_vec()).expect("valid ratios")
}

fn models() -> [(&'static str, SprayModel); 2] {
    [("cantor", cantor_spray()), ("square", square_spray())]
}

/// 1. Closed-form similarity dimensions to 1e-10, each under 1 ms.
pub fn moran_closed_forms() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(1, "Moran closed forms");
    let cases = [
        ("{1/3,1/3}", vec![1.0 / 3.0, 1.0 / 3.0], 2f64.ln() / 3f64.ln()),
        ("{1/2,1/4}", vec![0.5, 0.25], ((1.0 + 5f64.sqrt()) / 2.0).log2()),
    ];
    for (name, r, exact) in cases {
        let r = ratios(&r);
        let start = Instant::now();
        let d = similarity_dimension(&r);
        out.budget(start.elapsed(), Duration::from_millis(1));
        let err = (d.value - exact).abs();
        out.check(err < 1e-10, format!("D({name}) = {:.12}, |error| = {err:.1e}", d.value));
    }
    out
}

/// 2. The 11 Cantor zeros in |Im| ≤ 30 are `D + ik 2π/ln 3`.
pub fn lattice_zeros_exact() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(2, "lattice zeros exact");
    let zeros = match find_complex_dimensions(&cantor_spray(), 30.0, None) {
        Ok(z) => z,
        Err(e) => {
            out.fail(e);
            return out;
        }
    };
    out.check(zeros.len() == 11, format!("{} zeros in |Im| <= 30", zeros.len()));
    let d = 2f64.ln() / 3f64.ln();
    let p = 2.0 * PI / 3f64.ln();
    let worst = (-5..=5)
        .zip(&zeros)
        .map(|(k, z)| (z.point - Complex64::new(d, k as f64 * p)).norm())
        .fold(0.0, f64::max);
    out.check(worst < 1e-9, format!("max distance to D + ik 2pi/ln3, k = -5..5: {worst:.1e}"));
    out
}

/// 3. Refined zeros of {1/2, 1/3} account for the full winding count.
pub fn winding_completeness() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(3, "winding completeness");
    let r = ratios(&[0.5, 1.0 / 3.0]);
    let start = Instant::now();
    let run = || -> Result<(u32, u32, f64)> {
        let window = search_window(&r, 20.0, None)?;
        let count = count_zeros_rectangle(&r, window)?;
        let zeros = find_zeros(&r, 20.0, None)?;
        let total = zeros.iter().map(|z| z.multiplicity).sum();
        let worst = zeros.iter().map(|z| z.residual).fold(0.0, f64::max);
        Ok((count, total, worst))
    };
    match run() {
        Ok((count, total, worst)) => {
            out.check(count == total, format!("winding count {count}, refined multiplicities {total}"));
            out.check(worst < 1e-10, format!("max |f(omega)| = {worst:.1e}"));
        }
        Err(e) => out.fail(e),
    }
    out.budget(start.elapsed(), Duration::from_secs(10));
    out
}

/// 4. `V(ε) = Σ r_j^n V(ε/r_j) + V_G(ε)` at 100 random ε in (0, 10g).
pub fn functional_equation() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(4, "functional equation");
    for (name, model) in models() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
        let g = model.generator().inradius();
        let mut run = || -> Result<f64> {
            let mut worst = 0.0f64;
            for _ in 0..100 {
                let eps = 10.0 * g * rng.gen_range(f64::EPSILON..1.0);
                let residual = functional_equation_residual(&model, eps)?;
                worst = worst.max(residual.abs() / direct_tube_volume(&model, eps)?);
            }
            Ok(worst)
        };
        match run() {
            Ok(worst) => out.check(worst < 1e-12, format!("{name}: max |residual| / V = {worst:.1e}")),
            Err(e) => out.fail(e),
        }
    }
    out
}

/// 5. Above the inradius the tube volume is the total volume.
pub fn constant_regime() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(5, "constant regime");
    for ((name, model), exact) in models().into_iter().zip([1.0, 144.0 / 83.0]) {
        let g = model.generator().inradius();
        let run = || -> Result<(f64, f64)> {
            let total = model.total_volume()?;
            let mut worst = 0.0f64;
            for eps in [g, 2.0 * g, 10.0 * g, 1e3 * g] {
                worst = worst.max((direct_tube_volume(&model, eps)? - total).abs() / total);
            }
            Ok((total, worst))
        };
        match run() {
            Ok((total, worst)) => {
                let err = (total - exact).abs() / exact;
                out.check(err < 1e-12, format!("{name}: total volume {total:.15}, relative error {err:.1e}"));
                out.check(worst < 1e-12, format!("{name}: direct vs total for eps >= g, {worst:.1e}"));
            }
            Err(e) => out.fail(e),
        }
    }
    out
}

/// 6. `N(s)` equals the Mellin integral of `V_G` at 20 random strip points.
pub fn mellin_numerator_identity() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(6, "Mellin numerator identity");
    let start = Instant::now();
    for (name, model) in models() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
        let n = model.dimension() as f64;
        let generator = model.generator();
        let mut run = || -> Result<f64> {
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let s = Complex64::new(rng.gen_range(n - 0.9..n - 0.1), rng.gen_range(-5.0..5.0));
                let closed = mellin_numerator(generator, s)?;
                let quad = mellin_numerator_quadrature(generator, s)?;
                worst = worst.max((closed - quad).norm());
            }
            Ok(worst)
        };
        match run() {
            Ok(worst) => out.check(worst < 1e-7, format!("{name}: max |N(s) - quadrature| = {worst:.1e}")),
            Err(e) => out.fail(e),
        }
    }
    out.budget(start.elapsed(), Duration::from_secs(5));
    out
}

/// 7. Cantor residue sums with 500 pairs match the direct values.
pub fn cantor_residue_agreement() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(7, "Cantor residue agreement");
    let start = Instant::now();
    let model = cantor_spray();
    let g = model.generator().inradius();
    let run = |out: &mut CriterionOutcome| -> Result<()> {
        let (zeros, window) = complex_dimensions_for_pairs(&model, 500)?;
        let expansion = ResidueExpansion::new(&model, &zeros, 500, window)?;
        let cases = [
            ("g/2", g / 2.0, None),
            ("g/4", g / 4.0, None),
            ("g/8", g / 8.0, None),
            ("0.1", 0.1, Some(13.0 / 15.0)),
            ("1/18", 1.0 / 18.0, Some(7.0 / 9.0)),
        ];
        for (label, eps, exact) in cases {
            let direct = direct_tube_volume(&model, eps)?;
            if let Some(exact) = exact {
                let err = (direct - exact).abs() / exact;
                out.check(err < 1e-12, format!("eps = {label}: direct {direct:.15}, relative error {err:.1e}"));
            }
            let e = expansion.evaluate(eps)?;
            let err500 = (e.residues() - direct).abs();
            let err5 = (e.partial_sums[5] - direct).abs();
            out.check(err500 < 1e-3, format!("eps = {label}: |residues(K=500) - direct| = {err500:.1e}"));
            out.check(err500 < err5, format!("eps = {label}: error at K=5 is {err5:.1e}"));
            out.check(e.im_leakage < 1e-10, format!("eps = {label}: imaginary leakage {:.1e}", e.im_leakage));
        }
        Ok(())
    };
    if let Err(e) = run(&mut out) {
        out.fail(e);
    }
    out.budget(start.elapsed(), Duration::from_secs(30));
    out
}

/// 8. Square-spray residue sums with 200 pairs within 1% of direct.
pub fn nonlattice_residue_agreement() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(8, "nonlattice residue agreement");
    let model = square_spray();
    let g = model.generator().inradius();
    let run = |out: &mut CriterionOutcome| -> Result<()> {
        let (zeros, window) = complex_dimensions_for_pairs(&model, 200)?;
        let expansion = ResidueExpansion::new(&model, &zeros, 200, window)?;
        for (label, eps) in [("g/2", g / 2.0), ("g/8", g / 8.0)] {
            let direct = direct_tube_volume(&model, eps)?;
            let e = expansion.evaluate(eps)?;
            let rel = (e.residues() - direct).abs() / direct;
            out.check(rel < 1e-2, format!("eps = {label}: relative error at K=200 {rel:.1e}"));
        }
        Ok(())
    };
    if let Err(e) = run(&mut out) {
        out.fail(e);
    }
    out
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// 9. Log-log slope of `V` over `ε = g 2^{-m}`, `m = 1..30`, near `n - D`.
///
/// Also notes the slope of `V` minus its integer-pole residues, which is
/// not part of the pass/fail decision.
pub fn tube_scaling_exponent() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(9, "tube scaling exponent");
    for (name, model) in models() {
        let target = model.dimension() as f64 - similarity_dimension(model.ratios()).value;
        let run = || -> Result<(f64, f64)> {
            let raw = scaling_exponent_fit(&model, 30)?;
            let points = dyadic_grid(&model, 30)
                .into_iter()
                .map(|eps| Ok((eps.ln(), (direct_tube_volume(&model, eps)? - integer_pole_sum(&model, eps)).ln())))
                .collect::<Result<Vec<_>>>()?;
            Ok((raw, slope(&points)))
        };
        match run() {
            Ok((raw, adjusted)) => {
                let dev = (raw - target).abs();
                out.check(
                    dev <= 0.05,
                    format!("{name}: slope {raw:.6}, n - D = {target:.6}, deviation {dev:.4}"),
                );
                out.note(format!("{name}: slope after removing integer-pole residues {adjusted:.6}"));
            }
            Err(e) => out.fail(e),
        }
    }
    out
}

/// 10. Numerical inverse Mellin transform within 1e-2 of direct.
pub fn inversion_cross_check() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(10, "inversion cross-check");
    let points = [[0.01, 0.1, 0.25], [0.05, 0.2, 0.7]];
    for ((name, model), grid) in models().into_iter().zip(points) {
        let c = default_abscissa(&model);
        for eps in grid {
            let run = || -> Result<(f64, f64)> {
                Ok((inverse_mellin_numeric(&model, eps, c, 200.0)?, direct_tube_volume(&model, eps)?))
            };
            match run() {
                Ok((inv, direct)) => {
                    let err = (inv - direct).abs();
                    out.check(err < 1e-2, format!("{name} eps = {eps}: |inverse - direct| = {err:.1e}"));
                }
                Err(e) => out.fail(e),
            }
        }
    }
    out
}
