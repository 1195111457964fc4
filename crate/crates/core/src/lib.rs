//! Jacobi-Poisson kernels for every admissible pair of type parameters `alpha, beta > -1`.
//!
//! The crate evaluates the kernel `H_t(theta, phi)` of the Poisson semigroup `exp(-t sqrt(J))`
//! attached to Jacobi trigonometric polynomial expansions on `[0, pi]` through independent
//! routes (the eigenfunction series, an Appell `F4` closed form and double-integral
//! representations against the measures `dPi_alpha`), and builds on top of it:
//!
//! * sharp two-sided comparators and ratio scans ([`sharp`]),
//! * the Calderon-Zygmund kernels of the maximal operator, Riesz transforms, square
//!   functions and Laplace / Laplace-Stieltjes multipliers, with growth and gradient
//!   scans ([`cz`]),
//! * exact spectral application of the same operators to finite expansions ([`spectral`]).
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// NaN-rejecting comparisons (`!(x > 0.0)`) and full-precision reference constants are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod cz;
pub mod error;
pub mod jacobi;
pub mod kernel;
pub mod pi_measure;
pub mod quad;
pub mod report;
pub mod sharp;
pub mod special;
pub mod spectral;
pub mod tprofile;

pub use error::{Error, Result};
pub use jacobi::{JacobiParams, OrthonormalBasis, ThetaQuadRule};
pub use kernel::{Deriv, Kernel, KernelQuery, Method};
pub use report::{EstimateReport, EstimateRow};
