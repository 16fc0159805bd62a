//! Deformed skew-symmetric Lie algebras with `S`-dependent brackets, the
//! induced Lie–Poisson pencils on strictly upper-triangular matrices, their
//! Casimirs and pencil integrals, and the resulting Hamiltonian flows.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod iso;
pub mod linalg;
pub mod poisson;
pub mod sample;

pub use error::{Error, Result};
