//! Radial hedgehog defects in nematic droplets.
//!
//! The reduced Landau-de Gennes energy of a spherically symmetric droplet
//! with strong radial anchoring collapses to a one-dimensional functional of
//! the scalar order parameter `h(r)` on `[0, R]`. This crate computes the
//! minimizing profile two independent ways (shooting on the singular
//! Euler-Lagrange equation and direct minimization of the discretized
//! energy) and provides numerical certificates for its analytic properties.
//!
//! Modules:
//!
//! - [`potential`]: bulk potential `g`, `h_plus`, regimes, non-dimensionalization.
//! - [`qtensor`]: symmetric traceless tensors and the tensor Euler-Lagrange residual.
//! - [`cauchy`]: Picard solver for the singular Cauchy problem at the origin.
//! - [`ode`]: adaptive Dormand-Prince integrator with dense output.
//! - [`grid`]: radial grids.
//! - [`profile`]: energy, gradient, second variation, shooting and minimization.
//! - [`diagnostics`]: bounds, monotonicity, Pohozaev and uniqueness certificates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod ode;
pub mod potential;
pub mod profile;
pub mod qtensor;

pub use error::{HedgehogError, Result};
pub use grid::{GridSpec, RadialGrid};
pub use potential::{BulkPotential, MaterialParams, ReducedParams, RescaleResult, TemperatureRegime};
pub use profile::{Provenance, RadialProfile};
