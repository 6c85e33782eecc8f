//! Exact tube volumes from the scaling sequence.
//!
//! cargo run --release --example direct_tube

use tubeforge::direct::{functional_equation_residual, scaling_exponent_fit};
use tubeforge::model::models::{cantor_spray, square_spray};
use tubeforge::{direct_tube_volume, similarity_dimension};

fn main() -> tubeforge::Result<()> {
    let cantor = cantor_spray();
    for (eps, exact) in [(1.0 / 18.0, "7/9"), (0.1, "13/15"), (0.5, "1")] {
        println!("Cantor V({eps:.6}) = {:.15}  (exact {exact})", direct_tube_volume(&cantor, eps)?);
    }

    let square = square_spray();
    println!("\nsquare spray, total volume {:.15} = 144/83", square.total_volume()?);
    for m in [1, 5, 10, 20, 30] {
        let eps = 0.5 * 0.5f64.powi(m);
        let v = direct_tube_volume(&square, eps)?;
        let residual = functional_equation_residual(&square, eps)?;
        println!("  eps = g/2^{m:<2}  V = {v:.15e}  functional equation residual {residual:.1e}");
    }
    let d = similarity_dimension(square.ratios()).value;
    println!("log-log slope over 30 halvings: {:.6} (n - D = {:.6})", scaling_exponent_fit(&square, 30)?, 2.0 - d);
    Ok(())
}
