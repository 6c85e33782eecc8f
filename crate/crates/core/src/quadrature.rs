//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

use num_complex::Complex64;

use crate::error::{Result, TubeError};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];

/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Subinterval budget for [`integrate`].
pub const MAX_SUBINTERVALS: usize = 20_000;

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Piece { a, b, value, error }
}

/// `∫_a^b f` to `abs_tol + rel_tol·|I|` by global adaptive bisection.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    let mut pieces = vec![gk15(&f, a, b)];
    loop {
        let total: Complex64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if error <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(total);
        }
        if pieces.len() >= MAX_SUBINTERVALS {
            return Err(TubeError::Convergence(format!(
                "quadrature on [{a}, {b}] stalled at error estimate {error:e}"
            )));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(k, _)| k)
            .expect("nonempty");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        pieces.push(gk15(&f, p.a, mid));
        pieces.push(gk15(&f, mid, p.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| Complex64::new(x.powi(5), -x), 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - Complex64::new(64.0 / 6.0, -2.0)).norm() < 1e-13);
    }

    #[test]
    fn oscillatory_exponential() {
        // ∫_0^40 e^{-(0.1 + 3i) u} du = (1 - e^{-40(0.1+3i)}) / (0.1 + 3i).
        let a = Complex64::new(0.1, 3.0);
        let exact = (1.0 - (-40.0 * a).exp()) / a;
        let v = integrate(|u| (-a * u).exp(), 0.0, 40.0, 1e-13, 1e-12).unwrap();
        assert!((v - exact).norm() < 1e-11);
    }
}
