//! Pseudo-spectral simulation of the surface quasi-geostrophic equation
//!
//! ```text
//! ∂tθ + u·∇θ + ν(−Δ)^{1/2}θ = 0,    u = ∇^⊥(−Δ)^{−1/2}θ
//! ```
//!
//! on the torus `[0, 2π)²`, with the functionals and sweeps used to study
//! the vanishing-viscosity limit.
//!
//! Norms use the normalized measure `dx/(2π)²`, so `‖f‖_{L²} = ‖f‖_{Ḣ⁰}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commutator;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod field;
pub mod grid;
pub mod ops;
pub mod random;
pub mod solver;
pub mod weight;

pub use commutator::{commutator_apply, continuity_ratio, weak_nonlinearity_both_sides};
pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::Grid;
pub use ops::Side;
pub use solver::{Solver, SolverConfig, Trajectory};
pub use weight::ConvexWeight;
