//! Threshold selection policies for two groups under fairness constraints,
//! and the one-step change in each group's mean score they induce.
//!
//! Modules, bottom-up:
//! - [`model`]: grids, distributions, policies, quantiles, threshold inversion
//! - [`curve`]: exact piecewise-linear curves and concave maximization
//! - [`objectives`]: utility/score-change models, the two-group [`Instance`], rate curves
//! - [`solvers`]: MaxUtil, demographic parity, equal opportunity, soft and outcome-based criteria
//! - [`analysis`]: special rates, regimes, proportion thresholds, measurement error, sweeps
//! - [`oracle`]: brute-force policy enumeration and property checks
//! - [`cli`]: config/CSV ingest and the command implementations behind the binary

// `!(x > y)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod curve;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod objectives;
pub mod oracle;
pub mod solvers;

pub use error::{Error, Result};
pub use objectives::{Group, Instance};
