//! Simulation of one Alice and a sequential chain of Bobs performing
//! unsharp spin measurements on a shared two-qubit state, with steering
//! inequality evaluation and constrained optimization of the settings.
//!
//! * [`model`] holds the domain types.
//! * [`density`] is the brute-force density-matrix engine (exact joint
//!   distributions under square-root instruments).
//! * [`analytic`] computes averaged correlations in closed form.
//! * [`inequalities`] evaluates the CFFW and CJWR functionals.
//! * [`optimizer`] maximizes steering values under constraints.

pub mod analytic;
pub mod config;
pub mod density;
pub mod error;
pub mod experiments;
pub mod inequalities;
pub mod model;
pub mod optimizer;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use inequalities::{InequalityKind, SteeringEvaluation, SteeringKind};
pub use model::{AliceConfig, BobConfig, Direction, Scenario, Sharpness, UnsharpSetting};
