//! Secrecy analysis for finite symmetric-key ciphers built around one
//! quantity: the maximal correlation between plaintext and ciphertext.
//!
//! The crate computes that quantity exactly on small instances (via the
//! spectrum of the correlation operator of the induced joint pmf), searches
//! the eavesdropper's best guessing advantage exhaustively, constructs
//! stream and permutation-family ciphers whose correlation has a closed
//! spectral form, and evaluates the key-length bounds that tie advantage,
//! collision entropy, and correlation together in the log domain.
//!
//! Modules, bottom up:
//!
//! * [`pmf`] — validated probability vectors and matrices, collision
//!   entropy, chi-square divergence, mutual information.
//! * [`cipher`] — cipher tables, per-key injectivity validation, the joint
//!   plaintext/ciphertext distribution, JSON (de)serialization.
//! * [`spectral`] — the correlation matrix `B`, its operator norm, and the
//!   per-cipher [`spectral::CorrelationReport`].
//! * [`constructions`] — XOR stream ciphers (Walsh route), permutation
//!   families (adjacency-spectrum route), cascades, reference ciphers.
//! * [`adversary`] — exhaustive advantage maximization and the bound checks
//!   a secure cipher must pass.
//! * [`bounds`] — key-length and advantage bounds evaluated in log2 space so
//!   gigabit message lengths and astronomically small correlations stay
//!   finite.

#![forbid(unsafe_code)]

pub mod adversary;
pub mod bounds;
pub mod cipher;
pub mod constructions;
pub mod partitions;
pub mod pmf;
pub mod spectral;

pub use cipher::{Cipher, MessageDistributionScenario};
pub use pmf::{JointPmf, Pmf};
pub use spectral::{correlation_report, maximal_correlation, CorrelationReport};

/// Errors shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("chi-square is infinite: outcome {index} has p = {p} but q = 0")]
    InfiniteChiSquare { index: usize, p: f64 },

    #[error("conditional pmf undefined: column {column} has zero probability")]
    ZeroColumn { column: usize },

    /// Per-key injectivity failure; names the first collision found.
    #[error("cipher {label:?}: key {key} sends messages {m1} and {m2} to the same ciphertext {c}")]
    KeyCollision {
        label: String,
        key: usize,
        m1: usize,
        m2: usize,
        c: usize,
    },

    #[error("invalid cipher: {0}")]
    InvalidCipher(String),

    #[error("cipher file: {0}")]
    BadCipherFile(String),

    #[error("cascade stages do not compose: first stage emits {first_out} ciphertexts, second stage takes {second_in} messages")]
    CascadeMismatch { first_out: usize, second_in: usize },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("unknown reference cipher {0:?}")]
    UnknownReference(String),

    #[error("side information: {0}")]
    SideInfo(String),

    #[error("invalid bound query: {0}")]
    InvalidQuery(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
