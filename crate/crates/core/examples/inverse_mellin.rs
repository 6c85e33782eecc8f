//! The Mellin numerator against quadrature, and the tube volume recovered
//! by integrating along a vertical line.
//!
//! cargo run --release --example inverse_mellin

use num_complex::Complex64;
use tubeforge::model::models::{square_spray, unit_square};
use tubeforge::tube::{default_abscissa, mellin_numerator, mellin_numerator_quadrature};
use tubeforge::{direct_tube_volume, inverse_mellin_numeric};

fn main() -> tubeforge::Result<()> {
    let square = unit_square();
    for s in [Complex64::new(1.5, 0.3), Complex64::new(1.2, -4.0)] {
        let closed = mellin_numerator(&square, s)?;
        let quad = mellin_numerator_quadrature(&square, s)?;
        println!("N({s}) = {closed:.12}, quadrature differs by {:.1e}", (closed - quad).norm());
    }

    let spray = square_spray();
    let c = default_abscissa(&spray);
    println!("\ninversion along Re s = {c:.6}, T = 200");
    for eps in [0.01, 0.1, 0.3, 2.0] {
        let v = inverse_mellin_numeric(&spray, eps, c, 200.0)?;
        let exact = direct_tube_volume(&spray, eps)?;
        println!("  eps = {eps:<5} inverse {v:.10}  direct {exact:.10}");
    }
    Ok(())
}
