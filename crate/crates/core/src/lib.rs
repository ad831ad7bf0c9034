//! Numerical toolkit for the Aharonov-Bohm / Aharonov-Casher pair.
//!
//! - [`geometry`]: oriented paths, winding numbers, refinement
//! - [`fields`]: dipole, fluxon and line-charge evaluators
//! - [`dynamics`]: the charge / moment Lagrangian, its symmetries and forces
//! - [`phase`]: adaptive line-integral phases and topological checks
//! - [`entangle`]: fluxon-electron two-packet state algebra
//! - [`scenario`]: JSON scenarios, sweeps and the bundled invariant suite
//!
//! Heavy loops run on rayon when the `parallel` feature is on (the default);
//! all reductions use a fixed order so results do not depend on threading.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entangle;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod par;
pub mod phase;
pub mod scenario;

pub use error::{Error, Result};
