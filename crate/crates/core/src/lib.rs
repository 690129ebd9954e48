pub mod cli;
pub mod error;
pub mod experiments;
pub mod graphgen;
pub mod ising1d;
pub mod jet;
pub mod limits;
pub mod mcmc;
pub mod observables;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
