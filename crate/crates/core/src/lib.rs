//! Numerical laboratory for the composite wave made of a planar 1-rarefaction
//! and a planar viscous 2-shock of the barotropic Navier-Stokes equations on
//! the slab `ℝ × 𝕋²`.
//!
//! The crate builds the waves, evolves perturbed data with an explicit
//! finite-difference solver coupled to the shock shift ODE, and measures the
//! weighted relative entropy, good terms and interaction envelopes along the
//! way. See the `examples/` directory for one runnable program per capability.

pub mod error;
pub mod gas;
pub mod rarefaction;
pub mod shock;
pub mod solver;
pub mod verdict;
pub mod composite;
pub mod diagnostics;
pub mod shift;
pub mod expcli;

pub use error::{Error, Result};
pub use gas::{GasModel, PlanarState};
