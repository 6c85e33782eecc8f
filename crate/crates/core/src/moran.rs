//! Similarity dimension: the real root of `Σ r_j^D = 1`.

use crate::model::RatioList;
use crate::summation::compensated_sum;

/// Residual below which the root is accepted.
pub const RESIDUAL_TOLERANCE: f64 = 1e-13;

const BISECTION_STEPS: usize = 30;
const MAX_NEWTON_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityDimension {
    pub value: f64,
    /// `|Σ r_j^D - 1|`
    pub residual: f64,
    pub iterations: usize,
}

/// `Σ_j r_j^x`, strictly decreasing in `x`, equal to `J` at `x = 0`.
pub fn real_dirichlet_sum(ratios: &RatioList, x: f64) -> f64 {
    compensated_sum(ratios.as_slice().iter().map(|r| r.powf(x)))
}

/// `d/dx Σ_j r_j^x = Σ_j r_j^x ln r_j` (always negative).
pub fn real_dirichlet_derivative(ratios: &RatioList, x: f64) -> f64 {
    compensated_sum(ratios.as_slice().iter().map(|r| r.powf(x) * r.ln()))
}

/// Solve the Moran equation.
///
/// Brackets the root in `[lo, hi]` by doubling `hi` from 1, bisects a fixed
/// number of times, then polishes with Newton steps kept inside the bracket
/// until the residual drops below [`RESIDUAL_TOLERANCE`].
pub fn similarity_dimension(ratios: &RatioList) -> SimilarityDimension {
    if ratios.len() == 1 {
        return SimilarityDimension { value: 0.0, residual: 0.0, iterations: 0 };
    }
    let excess = |x: f64| real_dirichlet_sum(ratios, x) - 1.0;

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut iterations = 0;
    while excess(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
    }

    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let mut x = 0.5 * (lo + hi);
    let mut fx = excess(x);
    let mut best = (x, fx.abs());
    for _ in 0..MAX_NEWTON_STEPS {
        if fx.abs() < RESIDUAL_TOLERANCE {
            break;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / real_dirichlet_derivative(ratios, x);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
        fx = excess(x);
        iterations += 1;
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
    }

    SimilarityDimension { value: best.0, residual: best.1, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratios(v: &[f64]) -> RatioList {
        RatioList::new(v.to_vec()).unwrap()
    }

    /// Plain bisection to machine precision; independent of the solver path.
    fn bisection_oracle(r: &[f64]) -> f64 {
        let sum = |x: f64| r.iter().map(|q| q.powf(x)).sum::<f64>();
        let (mut lo, mut hi) = (0.0, 64.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sum(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn dirichlet_sum_examples() {
        let third = ratios(&[1.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(real_dirichlet_sum(&third, 0.0), 2.0);
        assert!((real_dirichlet_sum(&third, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        let mixed = ratios(&[0.5, 1.0 / 3.0, 0.25]);
        assert!((real_dirichlet_sum(&mixed, 1.0) - 13.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        let d = similarity_dimension(&ratios(&[1.0 / 3.0, 1.0 / 3.0]));
        assert!((d.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(d.residual < RESIDUAL_TOLERANCE);

        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let d = similarity_dimension(&ratios(&[0.5, 0.25]));
        assert!((d.value - golden.log2()).abs() < 1e-12);
    }

    #[test]
    fn nonlattice_value_matches_bisection() {
        let r = [0.5, 1.0 / 3.0, 0.25];
        let oracle = bisection_oracle(&r);
        // Frozen from the oracle above.
        assert!((oracle - 1.082_131_5).abs() < 1e-6, "oracle {oracle}");
        let d = similarity_dimension(&ratios(&r));
        assert!((d.value - oracle).abs() < 1e-12);
        assert!(d.residual < RESIDUAL_TOLERANCE);
    }

    #[test]
    fn single_ratio_has_dimension_zero() {
        let d = similarity_dimension(&ratios(&[0.7]));
        assert_eq!(d.value, 0.0);
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn large_dimension_needs_bracket_expansion() {
        let r = vec![0.9; 40];
        let d = similarity_dimension(&RatioList::new(r.clone()).unwrap());
        assert!((d.value - bisection_oracle(&r)).abs() < 1e-10);
        assert!(d.value > 30.0);
    }

    fn ratio_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.05f64..0.95, 2..=6)
    }

    proptest! {
        #[test]
        fn solves_moran_equation(r in ratio_vec()) {
            let list = RatioList::new(r).unwrap();
            let d = similarity_dimension(&list);
            prop_assert!((real_dirichlet_sum(&list, d.value) - 1.0).abs() < 1e-12);
            prop_assert!(d.value > 0.0);
        }

        #[test]
        fn permutation_invariant(r in ratio_vec(), rot in 0usize..6) {
            let mut p = r.clone();
            let k = rot % p.len();
            p.rotate_left(k);
            p.reverse();
            let a = similarity_dimension(&RatioList::new(r).unwrap());
            let b = similarity_dimension(&RatioList::new(p).unwrap());
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        }

        #[test]
        fn sum_strictly_decreasing(r in ratio_vec(), x in -3.0f64..5.0, dx in 0.01f64..2.0) {
            let list = RatioList::new(r).unwrap();
            prop_assert!(real_dirichlet_sum(&list, x) > real_dirichlet_sum(&list, x + dx));
        }
    }
}
