//! Error type shared by all modules.

use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("{context}: matrix contains non-finite entries")]
    NonFinite { context: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("matrix must have full row rank: rank {rank} < {rows} rows")]
    NotFullRowRank { rank: usize, rows: usize },

    #[error("pole set is not closed under conjugation: {0} has no conjugate partner")]
    PoleConjugation(Complex64),

    #[error("pole count mismatch: expected {expected}, got {got}")]
    PoleCount { expected: usize, got: usize },

    #[error("pair is not controllable: controllability matrix rank {rank} < order {order}")]
    UncontrollablePair { rank: usize, order: usize },

    #[error("pole placement failed: {0}")]
    PlacementFailed(String),

    #[error(
        "target rows are not invariant under A (rank [FA; F] = {stacked_rank} > rank F = \
         {rank_f}); use the augmented design"
    )]
    NeedsAugmentation { stacked_rank: usize, rank_f: usize },

    #[error("existence condition failed ({condition}): {detail}")]
    ExistenceFailed {
        condition: &'static str,
        detail: String,
    },

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error("state norm exceeded {limit:e} at t = {time}: closed loop diverges")]
    Divergence { time: f64, limit: f64 },

    #[error("an output matrix C is required for static output feedback")]
    MissingOutputMatrix,

    #[error("internal error: {0}")]
    Internal(String),
}
