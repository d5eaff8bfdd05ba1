//! Fidelity-based quantum coherence.
//!
//! The coherence of a pure state |φ⟩ = Σ c_i |i⟩ with respect to the fixed
//! reference basis is `C_F(φ) = √(1 − max_i |c_i|²)`, the fidelity distance to
//! the closest incoherent state. Mixed states get the convex-roof extension,
//! which has a closed form for qubits and is estimated numerically otherwise.
//!
//! The crate is organised as:
//!
//! * [`linalg`], [`state`], [`sampling`], [`rng`]: complex matrices, validated
//!   states and seeded random sampling.
//! * [`measures`]: Uhlmann fidelity, the l1 norm of coherence, `C_F` closed
//!   forms and the convex-roof estimator.
//! * [`channels`]: Kraus-operator channels and the incoherence test.
//! * [`transform`]: pure-qubit to qubit conversion by incoherent operations.
//! * [`verify`]: seeded randomized suites checking the coherence-measure
//!   conditions.
//!
//! Data-parallel loops (restarts, verification trials) run on rayon when the
//! `parallel` feature is enabled (the default) and sequentially otherwise; see
//! [`exec::Execution`].

// `!(x <= tol)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod measures;
pub mod rng;
pub mod sampling;
pub mod state;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use state::{DensityMatrix, PureState};

/// Slack allowed when validating user-supplied states and channels.
pub const STRUCTURAL_TOL: f64 = 1e-9;

/// Accuracy expected from decompositions (eigen, square root).
pub const NUMERIC_TOL: f64 = 1e-10;
