//! Radially symmetric solutions of the planar Chern–Simons–Schrödinger
//! equation
//!
//! ```text
//! -Δu + 2q u ∫_{|x|}^∞ (u²(s)/s) h_u(s) ds + q u h_u(|x|)²/|x|² = g(u),
//! h_u(s) = ∫_0^s τ u²(τ) dτ,
//! ```
//!
//! together with its variational machinery: the nonlocal term `N(u)`, the
//! truncated and dilation-augmented energies, mountain-pass and nodal
//! shooting solvers, continuation in `q` and independent verification of
//! the resulting profiles.

pub mod energy;
pub mod error;
pub mod exec;
pub mod grid;
pub mod interp;
pub mod linalg;
pub mod nonlinearity;
pub mod nonlocal;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{make_grid, Grading, RadialFunction, RadialGrid};
pub use nonlinearity::NonlinearityModel;
