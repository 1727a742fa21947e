pub mod bayes;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod numeric;
pub mod rng;
pub mod tasks;
pub mod tuning;
pub mod verify;

pub use error::{Error, Result};
