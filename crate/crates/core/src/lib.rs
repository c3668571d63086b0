//! Exact simulation of integrated fractional Brownian motion, small-value
//! statistics of its maximum, and the Hopf construction for inviscid Burgers
//! flow with fractional Brownian initial velocity.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod burgers;
pub mod error;
pub mod generator;
pub mod kernels;
pub mod montecarlo;
pub mod pathstats;
pub mod powerlaw;
pub mod quad;
pub mod rng;
pub mod toeplitz;

pub use error::{Error, Result};
pub use generator::{FbmPlan, GenPlan, IfbmPath, Interval};
pub use kernels::HurstParams;
pub use rng::SeedTag;
