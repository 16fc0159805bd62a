//! The deformed skew-symmetric and symmetric matrix spaces, their diagonal
//! structure matrices, and the `S`-dependent bracket.

mod dual;
mod elements;
mod ops;
mod params;
mod structure;

pub use dual::DualPoint;
pub use elements::{
    is_member_skew, is_member_skew_projector, is_member_sym, is_member_sym_projector, max_abs,
    skew_residual, skew_residual_projector, sym_residual, sym_residual_projector, SkewElement,
    SymElement, DEFAULT_TOL,
};
pub use ops::{
    bracket, bracket_matrix, inverse_membership_check, pi_project, product_membership_check,
    skew_part, trace_pair, ElementRef, InverseReport, ProductReport,
};
pub use params::{
    lower_diag_pairs, lower_index, lower_pairs, skew_dim, sym_dim, DeformationParams,
};
pub use structure::{build_structure, StructureMatrices, ZeroBlock};
pub(crate) use structure::{diag_left, diag_right};
