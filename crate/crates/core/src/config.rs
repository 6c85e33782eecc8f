//! JSON spray configurations.
//!
//! ```json
//! { "dimension": 1, "ratios": [0.3333333333333333, 0.3333333333333333],
//!   "generator": { "kappa": [2.0], "inradius": 0.16666666666666666, "volume": 0.3333333333333333 } }
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Result, TubeError};
use crate::model::{MonophaseGenerator, RatioList, SprayModel};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SprayConfig {
    pub dimension: usize,
    pub ratios: Vec<f64>,
    pub generator: GeneratorConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kappa: Vec<f64>,
    pub inradius: f64,
    pub volume: f64,
}

impl SprayConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SprayConfig =
            serde_json::from_str(text).map_err(|e| TubeError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TubeError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        let g = &self.generator;
        let numbers = self.ratios.iter().chain(&g.kappa).chain([&g.inradius, &g.volume]);
        if let Some(x) = numbers.into_iter().find(|x| !x.is_finite()) {
            return Err(TubeError::Config(format!("non-finite number {x}")));
        }
        if g.kappa.len() != self.dimension {
            return Err(TubeError::Config(format!(
                "kappa has {} entries but dimension is {}",
                g.kappa.len(),
                self.dimension
            )));
        }
        Ok(())
    }

    /// The model, checked structurally but not validated.
    pub fn to_model(&self) -> Result<SprayModel> {
        let ratios = RatioList::new(self.ratios.clone())?;
        let g = &self.generator;
        let generator = MonophaseGenerator::new(self.dimension, g.kappa.clone(), g.inradius, g.volume)?;
        Ok(SprayModel::new(ratios, generator))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::models::{cantor_spray, square_spray};

    const CANTOR: &str = include_str!("../configs/cantor.json");
    const SQUARE: &str = include_str!("../configs/square.json");

    #[test]
    fn bundled_configs_match_models() {
        assert_eq!(SprayConfig::from_json(CANTOR).unwrap().to_model().unwrap(), cantor_spray());
        assert_eq!(SprayConfig::from_json(SQUARE).unwrap().to_model().unwrap(), square_spray());
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            r#"{"dimension": 1, "ratios": [0.5]}"#,
            r#"{"dimension": 2, "ratios": [0.5], "generator": {"kappa": [1.0], "inradius": 1, "volume": 1}}"#,
            r#"{"dimension": 1, "ratios": [0.5], "generator": {"kappa": [1.0], "inradius": 1e400, "volume": 1}}"#,
            r#"{"dimension": 1, "ratios": [0.5], "extra": 0, "generator": {"kappa": [1.0], "inradius": 1, "volume": 1}}"#,
            r#"{"dimension": 1, "ratios": [NaN], "generator": {"kappa": [1.0], "inradius": 1, "volume": 1}}"#,
        ];
        for text in cases {
            let err = SprayConfig::from_json(text).unwrap_err();
            assert!(matches!(err, TubeError::Config(_)), "{text}: {err}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn structural_errors_surface_from_model() {
        let text = r#"{"dimension": 1, "ratios": [1.5], "generator": {"kappa": [2.0], "inradius": 0.5, "volume": 1}}"#;
        let config = SprayConfig::from_json(text).unwrap();
        assert!(matches!(config.to_model(), Err(TubeError::InvalidInput(_))));
    }
}
