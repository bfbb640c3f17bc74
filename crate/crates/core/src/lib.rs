//! Continuized Nesterov momentum for smooth nonconvex optimization.
//!
//! The algorithm evaluates, exactly, a two-trajectory process that follows a
//! linear flow between the arrival times of a unit-rate Poisson process and
//! takes gradient steps at the arrivals. This crate provides:
//!
//! - [`rng`]: seedable exponential jump-time sampling and sub-stream derivation.
//! - [`oracle`]: the objective interface and benchmark problems (convex
//!   quadratics, symmetric low-rank matrix factorization, a multiplicative-noise
//!   stochastic wrapper satisfying the strong growth condition).
//! - [`cna`]: parameter schedules, the one-step update, Poisson-weighted
//!   averaging and full runs with output-point selection.
//! - [`diagnostics`]: the jump-time functionals `H0`, `H1`, `H2`, `Delta_n`,
//!   their closed-form expectations and Monte Carlo estimators.
//! - [`baselines`]: gradient descent, Nesterov momentum with negative-curvature
//!   exploitation and restarted Nesterov momentum.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cna;
pub mod diagnostics;
pub mod error;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod trace;

pub use error::{CoreError, Result};
pub use oracle::{ObjectiveHandle, Point};
pub use rng::{JumpSchedule, Seed};
pub use trace::{Algorithm, BestKind, RunRecord, RunSummary, TraceRow};
