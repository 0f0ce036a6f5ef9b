//! Radial numerics for the focusing inhomogeneous biharmonic Schrödinger equation
//!
//! ```text
//! i ∂_t v − Δ² v = −|x|^b |v|^{q−1} v,   x ∈ R^N, v radial.
//! ```
//!
//! The crate computes ground states and the sharp Gagliardo–Nirenberg
//! constant, evolves data in time and checks the virial and threshold
//! machinery around the ground state.

pub mod dichotomy;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod inequality;
pub mod params;
pub mod special;
pub mod virial;

pub use grid::{GridError, RadialField, RadialGrid};
pub use params::{DerivedExponents, Exponent, ModelParams, Theorem};
