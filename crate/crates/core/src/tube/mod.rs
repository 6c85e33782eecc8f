//! The Mellin-side tube formula: numerator, residues, and inversion.

pub mod inversion;
pub mod numerator;
pub mod residues;

pub use inversion::{default_abscissa, inverse_mellin_numeric};
pub use numerator::{mellin_numerator, mellin_numerator_quadrature, MellinNumerator};
pub use residues::{
    compare, complex_dimensions_for_pairs, contour_residue, integer_pole_residue, integer_pole_sum,
    tube_volume_residues, zero_residue, zero_residue_with_neighbors, ComparisonRow, ResidueExpansion,
    ResidueKind, ResidueTerm, TubeEvaluation,
};
