//! Kähler curvature tensors, their Calabi and Kähler curvature operators,
//! the curvature term of the Lichnerowicz Laplacian on forms, and
//! eigenvalue-count vanishing certificates.
#![no_std]
// `!(x < tol)` is deliberate throughout: NaN must count as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod certify;
pub mod curvature;
pub mod forms;
pub mod frame;
pub mod linalg;
pub mod model_spaces;
pub mod sampling;
pub mod spectral;
pub mod weitzenboeck;

pub type C64 = num_complex::Complex64;
