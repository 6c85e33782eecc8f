//! Inner tube volumes of self-similar sprays.
//!
//! A spray is a generator `G` together with scaled copies `λ_w G`, one for
//! every word `w` over a ratio list `r_1, …, r_J`. When the tube function
//! of `G` is a single polynomial up to its inradius `g`, the tube volume of
//! the whole spray can be computed two independent ways:
//!
//! * [`direct`] sums the scaling sequence exactly;
//! * [`tube`] sums residues of its Mellin transform over the complex
//!   dimensions found by [`dimensions`], the zeros of `1 - Σ r_j^s`.
//!
//! ```
//! use tubeforge::model::models::cantor_spray;
//! use tubeforge::{direct_tube_volume, tube_volume_residues};
//!
//! let cantor = cantor_spray();
//! let exact = direct_tube_volume(&cantor, 0.1).unwrap();
//! assert!((exact - 13.0 / 15.0).abs() < 1e-15);
//!
//! let eval = tube_volume_residues(&cantor, 0.1, 50, 300.0).unwrap();
//! assert!((eval.residues() - exact).abs() < 1e-4);
//! ```

pub mod cli;
pub mod config;
pub mod dimensions;
pub mod direct;
pub mod error;
pub mod model;
pub mod moran;
pub mod quadrature;
pub mod report;
pub mod selftest;
pub mod summation;
pub mod tube;

pub use config::SprayConfig;
pub use dimensions::{find_complex_dimensions, ComplexDimension};
pub use direct::direct_tube_volume;
pub use error::{Result, TubeError};
pub use model::{MonophaseGenerator, RatioList, SprayModel, ValidationOptions};
pub use moran::similarity_dimension;
pub use tube::{compare, inverse_mellin_numeric, tube_volume_residues, ResidueExpansion, TubeEvaluation};
