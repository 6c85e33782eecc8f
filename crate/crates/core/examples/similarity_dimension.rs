//! Similarity dimensions and lattice structure of a few ratio lists.
//!
//! cargo run --example similarity_dimension

use tubeforge::dimensions::detect_lattice;
use tubeforge::{similarity_dimension, RatioList};

fn main() -> tubeforge::Result<()> {
    let lists: [(&str, Vec<f64>); 4] = [
        ("middle-third Cantor", vec![1.0 / 3.0, 1.0 / 3.0]),
        ("Fibonacci", vec![0.5, 0.25]),
        ("{1/2, 1/3}", vec![0.5, 1.0 / 3.0]),
        ("{1/2, 1/3, 1/4}", vec![0.5, 1.0 / 3.0, 0.25]),
    ];
    for (name, ratios) in lists {
        let ratios = RatioList::new(ratios)?;
        let d = similarity_dimension(&ratios);
        let kind = match detect_lattice(&ratios).period() {
            Some(p) => format!("lattice, period {p:.6}"),
            None => "nonlattice".to_string(),
        };
        println!("{name:>20}: D = {:.12} ({} iterations), {kind}", d.value, d.iterations);
    }
    Ok(())
}
