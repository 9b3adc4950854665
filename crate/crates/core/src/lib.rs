pub mod conic;
pub mod error;
pub mod extended;
pub mod graph;
pub mod heuristics;
pub mod pep;
pub mod spectral;
pub mod tuner;

pub use error::{Error, Result};
