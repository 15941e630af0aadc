pub mod csnca;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod numerics;
pub mod oversample;
pub mod pipeline;

pub use error::{Error, Result};
