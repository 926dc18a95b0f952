//! Information-theoretic dependence measures over discrete data, synthetic
//! datasets with controlled informative structure, and Monte Carlo sweeps of
//! the multivariate symmetrical uncertainty (MSU) against cardinality and
//! sample size.

pub mod cardinality;
pub mod cli;
pub mod csvio;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod synthgen;

pub use error::{Error, Result};
