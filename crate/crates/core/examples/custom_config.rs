//! Loading a spray from JSON, validating it and evaluating it.
//!
//! cargo run --release --example custom_config

use tubeforge::{direct_tube_volume, tube_volume_residues, SprayConfig, ValidationOptions};

const SIERPINSKI_LIKE: &str = r#"{
  "dimension": 2,
  "ratios": [0.5, 0.5, 0.5],
  "generator": { "kappa": [-12.0, 6.0], "inradius": 0.25, "volume": 0.75 }
}"#;

fn main() -> tubeforge::Result<()> {
    let model = SprayConfig::from_json(SIERPINSKI_LIKE)?.to_model()?;
    let report = model.validate(ValidationOptions::default());
    println!("validation: {report}");
    for eps in [0.01, 0.05, 0.2] {
        let eval = tube_volume_residues(&model, eps, 100, 1000.0)?;
        println!(
            "eps = {eps:<5} direct {:.12}  residues {:.12}",
            direct_tube_volume(&model, eps)?,
            eval.residues()
        );
    }

    let broken = SIERPINSKI_LIKE.replace("0.75", "0.8");
    let report = SprayConfig::from_json(&broken)?.to_model()?.validate(ValidationOptions::default());
    println!("\nwith a mismatched volume:\n{report}");
    Ok(())
}
