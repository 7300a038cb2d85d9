//! Success probability, delay and hybrid cache placement for cooperative
//! mmWave cellular networks.

pub mod analytic;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;
pub mod special;
pub mod toeplitz;

pub use error::{Error, Result};
pub use model::*;
