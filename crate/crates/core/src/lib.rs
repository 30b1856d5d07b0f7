//! Exact integer programming for programs with few rows and small coefficients.
//!
//! * [`decomp`] solves `max { c.x : A x = b, x >= 0 integer }` by splitting an
//!   optimal solution into a bounded part and at most `m` large components.
//! * [`mip`] extends this to continuous variables.
//! * [`pipeline`] reduces `max { c.x : A x <= b }` with bounded sub-determinants
//!   to the standard form through a Hermite Normal Form.
//! * [`oracle`] and [`gen`] provide exhaustive reference solvers and seeded instances.
//!
//! All arithmetic is exact.

pub mod decomp;
pub mod dp;
pub mod error;
pub mod gen;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod mip;
pub mod oracle;
pub mod pipeline;
pub mod simplex;

pub use decomp::{detect_unbounded, solve_standard, verify_witness, DecompositionWitness};
pub use dp::{dp_solve, lemma1_bound, papadimitriou_bound};
pub use error::{Error, Result};
pub use instance::{InequalityIp, MixedIp, ProblemInstance, Solution, StandardIp, Status};
pub use matrix::IntMatrix;
pub use mip::{kappa_solve, solve_mixed};
pub use pipeline::{c_delta_bound, lemma7_threshold, solve_inequality};
