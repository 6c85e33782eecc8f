//! Complex dimensions of a lattice and a nonlattice spray.
//!
//! cargo run --release --example complex_dimensions

use tubeforge::dimensions::{count_zeros_rectangle, search_window};
use tubeforge::find_complex_dimensions;
use tubeforge::model::models::{cantor_spray, square_spray};

fn main() -> tubeforge::Result<()> {
    let cantor = cantor_spray();
    println!("Cantor spray, |Im| <= 30 (one vertical line of zeros):");
    for z in find_complex_dimensions(&cantor, 30.0, None)? {
        println!("  {:>10.6} {:+12.6}i", z.re(), z.im());
    }

    let square = square_spray();
    let window = 40.0;
    let zeros = find_complex_dimensions(&square, window, None)?;
    let rect = search_window(square.ratios(), window, None)?;
    let count = count_zeros_rectangle(square.ratios(), rect)?;
    println!("\nsquare spray {{1/2, 1/3, 1/4}}, |Im| <= {window}: {} zeros, winding count {count}", zeros.len());
    for z in zeros.iter().filter(|z| z.im() >= 0.0) {
        println!("  {:>10.6} {:+12.6}i  |f| = {:.1e}", z.re(), z.im(), z.residual);
    }
    Ok(())
}
