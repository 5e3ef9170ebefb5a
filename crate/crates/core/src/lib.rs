//! Truncated-operator models of the quantum groups `C(SU_q(n))` and the quantum
//! Stiefel algebras `C(S_q^{n,2})`.
//!
//! The crate builds the elementary Toeplitz-type representations as symbolic
//! path sums, materializes them on truncated Fock spaces, and checks the
//! defining relations, the K-theory witness operators and the Fredholm index
//! pairings that detect `K_1` classes.
//!
//! Module map:
//! - [`coxeter`]: words and permutations in `S_n`.
//! - [`fock`]: atoms, sparse complex operators on tensor products, norms and
//!   spectral projections.
//! - [`symrep`]: symbolic representations `ψ_{t,w}` / `χ_w` as path sums.
//! - [`relations`]: residual checks of the defining relations and the
//!   compact-ideal lemmas.
//! - [`ktheory`]: witness unitaries, isometries and projections.
//! - [`fredholm`]: half-space projections and index pairings.
//! - [`suite`]: configuration, JSON reports and golden comparison.

pub mod coxeter;
pub mod fock;
pub mod fredholm;
pub mod ktheory;
pub mod relations;
pub mod suite;
pub mod symrep;

pub use num_complex::Complex64 as C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("atom {atom} cannot act on factor {space}")]
    AtomSpaceMismatch { atom: String, space: String },
    #[error("eigenvalue {eigenvalue} lies in the forbidden annulus for gap {gap}")]
    GapViolation { eigenvalue: f64, gap: f64 },
    #[error("operator is not self-adjoint (residual {0:e})")]
    NotSelfAdjoint(f64),
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("ambiguous rank: singular value {value:e} within a factor 10 of tolerance {tol:e}")]
    AmbiguousRank { value: f64, tol: f64 },
    #[error("unexpected atom: {0}")]
    UnexpectedAtom(String),
    #[error("inputs do not commute (residual {0:e})")]
    NotCommuting(f64),
    #[error("input is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
