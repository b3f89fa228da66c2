use thiserror::Error;

use crate::lattice::SubsetMask;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading an input file and writing a report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input count {0} outside the supported range 1..=12")]
    InputCountOutOfRange(usize),

    #[error("subset {0} is not defined for the supplied values")]
    MissingSubset(SubsetMask),

    #[error("vectors have mismatched lengths ({expected} vs {found})")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("negative weight {weight} at grid cell {cell}")]
    NegativeWeight { cell: usize, weight: f64 },

    #[error("weights sum to {sum}, not 1")]
    SumNotOne { sum: f64 },

    #[error("input `{name}` is almost surely constant")]
    DegenerateMarginal { name: String },

    #[error("partitions are defined over different atom sets ({0} vs {1} atoms)")]
    MismatchedAtoms(usize, usize),

    #[error("non-perfect functional dependence has not been verified for this support")]
    Assumption1NotVerified,

    #[error("component dimensions sum to {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("component system is singular (condition number {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("reconstruction residual {residual:e} exceeds tolerance")]
    ReconstructionFailed { residual: f64 },

    #[error("joint law is not of product form (deviation {deviation:e})")]
    NotProductForm { deviation: f64 },

    #[error("model is constant on the product support of the marginals")]
    DegenerateTilde,

    #[error("grid cell {0:?} is not in the support")]
    CellNotInSupport(Vec<usize>),

    #[error("inadmissible Bernoulli parameters: {0}")]
    InadmissibleRho(String),

    #[error("symmetric eigen-solve failed: {0}")]
    EigenFailure(String),
}
