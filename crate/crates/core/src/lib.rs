//! Exact generalized Hoeffding decomposition for discrete, possibly dependent inputs.

pub mod bernoulli;
pub mod cli;
pub mod decomposition;
pub mod distribution;
pub mod error;
pub mod hilbert;
pub mod indices;
pub mod lattice;

pub use error::{Error, Result};
pub use lattice::SubsetMask;
