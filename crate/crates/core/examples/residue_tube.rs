//! The residue tube formula converging to the exact value as pairs of
//! complex dimensions are added.
//!
//! cargo run --release --example residue_tube

use tubeforge::model::models::{cantor_spray, square_spray};
use tubeforge::tube::complex_dimensions_for_pairs;
use tubeforge::{direct_tube_volume, ResidueExpansion};

fn main() -> tubeforge::Result<()> {
    for (name, model, eps) in [("Cantor", cantor_spray(), 0.1), ("square", square_spray(), 0.125)] {
        let (zeros, window) = complex_dimensions_for_pairs(&model, 400)?;
        let expansion = ResidueExpansion::new(&model, &zeros, 400, window)?;
        let eval = expansion.evaluate(eps)?;
        let exact = direct_tube_volume(&model, eps)?;
        println!("{name} spray at eps = {eps}, direct {exact:.15}");
        for k in [0, 1, 5, 25, 100, 400] {
            let v = eval.partial_sums[k];
            println!("  {k:>4} pairs: {v:.15}  error {:.2e}", (v - exact).abs());
        }
        println!("  imaginary leakage {:.1e}\n", eval.im_leakage);
    }
    Ok(())
}
