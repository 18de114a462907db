pub mod arrangement;
pub mod cli;
pub mod coeff;
pub mod error;
pub mod family;
pub mod linalg;
pub mod oracle;

pub use error::{Error, Result};

/// Default work budget, in elementary steps.
pub const DEFAULT_BUDGET: u64 = 100_000_000;
