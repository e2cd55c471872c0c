//! Grids, scalar fields, Dirichlet boundary data and variable-exponent
//! fields with their logarithmic gradients.
//!
//! All types are immutable after construction and safe to share across
//! threads; fields reference their grid through an `Arc`.

mod boundary;
mod exponent;
mod field;
mod grid;

pub use boundary::{lipschitz_constant, BoundaryData};
pub use exponent::{make_exponential_exponent, ExponentField, ExponentKind};
pub use field::ScalarField;
pub use grid::Grid;
