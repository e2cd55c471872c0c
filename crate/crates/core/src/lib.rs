//! infx: a desk-scale numerical laboratory for the infinity-Laplace
//! equation with a variable exponent.
//!
//! The equation under study couples the infinity-Laplacian with a drift
//! term driven by grad ln p for a positive exponent field p(x):
//! smooth solutions keep |grad u|^p(x) constant along stream lines. The
//! crate provides:
//!
//! * [`domain`]: grids, scalar fields, boundary data, exponent fields;
//! * [`operators`]: pointwise discrete operators for residual measurement;
//! * [`solvers`]: monotone Jacobi solvers for the equation and its upper
//!   and lower auxiliary (eikonal-constrained) companions;
//! * [`transform`]: the approximation of the identity and its
//!   strict-supersolution margins;
//! * [`estimates`]: stability-bound evaluators and the doubling probe;
//! * [`oracle1d`]: exact 1D ground truth via the first integral;
//! * [`harness`]: experiment configs, CSV/JSON reports and calibration.

// validation guards are written `!(x > 0.0)` so that NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod estimates;
pub mod harness;
pub mod numeric;
pub mod operators;
pub mod oracle1d;
pub mod solvers;
pub mod transform;

pub use error::{Error, Result};
