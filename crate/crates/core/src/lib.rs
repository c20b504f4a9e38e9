pub mod cli;
pub mod conjecture;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod operator;
pub mod policy;
pub mod protocols;
pub mod states;

pub use error::{Error, Result};
pub use policy::NumericPolicy;
