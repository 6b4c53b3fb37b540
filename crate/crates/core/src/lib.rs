//! Abstract-convexity toolkit for composite problems `inf_x f(x) + g(Lx)`.
//!
//! Elementary functions are generalized quadratics on R^n. The crate computes
//! their conjugates, epsilon-subdifferentials, the conjugate and Lagrange duals
//! of the composite problem, and checks zero-gap and strong-duality
//! certificates. Closed forms are used wherever the data are quadratic; a
//! brute-force grid oracle covers the rest and is always flagged as truncated.

pub mod conjugate;
pub mod duality;
pub mod elementary;
pub mod error;
pub mod grid;
pub mod harness;
pub mod lagrange;
pub mod objective;
pub mod tolerance;

pub use elementary::{CurvatureSpec, Family, LinearMap, Quadratic};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use objective::Objective;
