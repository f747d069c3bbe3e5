//! Gaussian wave packets and the Feynman–de Broglie–Bohm propagator of the
//! linearized Kostin (frictional Schrödinger) equation, with a direct
//! split-step solver of the full nonlinear equation as an independent check.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// The kernel entry points take the full physical setup as separate arguments.
#![allow(clippy::too_many_arguments)]

pub mod csvfmt;
pub mod error;
pub mod grid;
pub mod model;
pub mod packet;
pub mod pde;
pub mod propagator;
pub mod quadrature;
pub mod trajectory;
pub mod unwrap;
pub mod validate;

pub use error::{Error, Result};
pub use grid::{ComplexGridField, SpatialGrid};
pub use model::{PhysicalSystem, PotentialModel};
pub use trajectory::{InitialConditions, TrajectorySeries, TrajectoryState};
