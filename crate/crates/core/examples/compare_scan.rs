//! A comparison table over a logarithmic grid, written as CSV.
//!
//! cargo run --release --example compare_scan > scan.csv

use tubeforge::compare;
use tubeforge::model::models::square_spray;
use tubeforge::report::comparison_csv;

fn main() -> tubeforge::Result<()> {
    let model = square_spray();
    let g = model.generator().inradius();
    let grid: Vec<f64> = (0..=24).map(|k| g * 2f64.powf(-0.5 * k as f64)).collect();
    // The first point is ε = g, outside the residue formula's domain: its
    // residue cells stay empty and the scan carries on.
    let rows = compare(&model, &grid, 200, None)?;
    print!("{}", comparison_csv(&rows));
    Ok(())
}
