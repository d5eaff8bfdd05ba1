use thiserror::Error;

use crate::channels::ChannelReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: max |M_ij - conj(M_ji)| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("trace is {trace}, expected 1")]
    Trace { trace: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("state vector is not normalized: norm² = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("state vector is empty")]
    Empty,

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("argument {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("operation requires dimension {required}, got {found}")]
    RequiresDim { required: usize, found: usize },

    #[error("qubit state is not phase-canonical (rho_01 = {re} + {im}i); canonicalize first")]
    NotCanonical { re: f64, im: f64 },

    #[error("permutation is not a bijection of 0..{dim}")]
    NotPermutation { dim: usize },

    #[error("ensemble size {ensemble_size} is smaller than the state rank {rank}")]
    EnsembleTooSmall { ensemble_size: usize, rank: usize },

    #[error("invalid channel: {0}")]
    Channel(ChannelReport),

    #[error("not transformable: C_F(source) = {source_cf:.12} < C_F(target) = {target_cf:.12}")]
    NotTransformable { source_cf: f64, target_cf: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}
