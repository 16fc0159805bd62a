//! Lie–Poisson structure on strictly upper-triangular matrices: gradients,
//! the bracket, the coadjoint action, Casimirs and pencil integrals.

mod bracket;
mod casimir;
mod field;
mod pencil;

pub use crate::algebra::DualPoint;
pub use bracket::{
    bracket_of_gradients, bracket_scale, coadjoint, coordinate_labels, lie_poisson_bracket,
    poisson_tensor,
};
pub use casimir::{casimir, casimir_degenerate, CasimirField, DegenerateCasimirField};
pub use field::{
    fd_step, finite_difference_gradient, gradient, CoordinateField, Field, FnField, LinearField,
    ProductField, QuadraticField, ScalarField,
};
pub use pencil::{pencil_integrals, PencilCoefficientField, PencilSpec};
