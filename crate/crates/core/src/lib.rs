//! Robust limit analysis of discretized structures under strength and
//! loading uncertainty.

pub mod benchmarks;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod limit_analysis;
pub mod linalg;
pub mod model;
pub mod reformulate;
pub mod solver;
pub mod uncertainty;

pub use error::{Error, Result};
