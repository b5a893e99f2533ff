//! Random projection ensemble dimension reduction for regression.
pub mod dataset;
pub mod dimension;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod pipeline;
pub mod projections;
pub mod regressors;
pub mod rng;
pub mod simmodels;

pub use error::{Result, RpeError};
