//! Proximal-like incremental aggregated gradient (PLIAG) methods over Bregman
//! distances.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernels`]: Legendre kernels, Bregman distances and the amplification
//!   function `ℓ` used to bound delayed Bregman terms.
//! - [`problems`]: component oracles, regularizers and the bundled problem
//!   library (lasso, Poisson elastic net, quartic, dual compressed sensing,
//!   Hölder toy).
//! - [`aggregation`]: delay schedules, the stored-gradient table and the
//!   `(I_k, J_k)` selection policies.
//! - [`subproblems`]: exact solvers for the per-iteration Bregman subproblem.
//! - [`stepsizes`]: step policies and rate formulas.
//! - [`solver`]: the iteration engine and its trace.
//! - [`diagnostics`]: Lyapunov functionals, rate certificates, growth
//!   estimators and recursion oracles.
//! - [`config`] and [`commands`]: run configuration parsing and the command
//!   implementations behind the `pliag` binary.

pub mod aggregation;
pub mod commands;
pub mod config;
pub mod diagnostics;
mod error;
pub mod kernels;
pub mod linalg;
pub mod problems;
pub mod sampling;
pub mod solver;
pub mod stepsizes;
pub mod subproblems;
pub mod verify;

pub use error::{Error, Result};

/// A point of `ℝ^d`.
pub type Point = nalgebra::DVector<f64>;
