//! Explicit steady solutions of the Couette-Taylor problem in a 3D cylindrical
//! annulus, with tools to verify them and to certify their stability.
//!
//! The crate is organised by concern:
//!
//! * [`geometry`]: the annulus, cylindrical points/vectors and frame changes.
//! * [`flows`]: closed-form Couette, spiral Poiseuille and spiral
//!   Poiseuille-Couette flows (velocity, pressure, vorticity).
//! * [`verify`]: Navier-Stokes residuals (closed-form and finite-difference),
//!   boundary-condition audits and the Navier-slip identity.
//! * [`stability`]: perturbation matrices, magnitude constants and
//!   certificates comparing them with Poincare-type lower bounds.
//! * [`functional_bounds`]: Poincare bounds, Rayleigh quotients of test fields
//!   and radius asymptotics.
//! * [`spectral`]: two-point boundary-value solves for the axial profile and
//!   the complex Sturm-Liouville resolvent scan.
//!
//! Everything is dimensionless; the kinematic viscosity is one.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod flows;
pub mod functional_bounds;
pub mod geometry;
pub mod linalg;
pub mod optimize;
pub mod sampling;
pub mod spectral;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use flows::{FlowFamily, FlowSpec};
pub use geometry::{Annulus, CylPoint, CylVector};
