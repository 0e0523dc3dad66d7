use thiserror::Error;

/// Errors raised by the library. Refutations are not errors; they are
/// reported through verdicts and counterexample certificates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("object mismatch: {0}")]
    ObjectMismatch(String),

    #[error("automorphism mismatch: {0}")]
    AutMismatch(String),

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("element does not belong to {ring}: {detail}")]
    InvalidElement { ring: String, detail: String },

    #[error("unsupported ring for {op}: {ring}")]
    UnsupportedRing { op: &'static str, ring: String },

    #[error("unsupported automorphism: {0}")]
    UnsupportedAut(String),

    #[error("morphism is not idempotent")]
    NotIdempotent,

    #[error("morphism has support in negative degree {0}")]
    NotPolynomial(i64),

    #[error("invalid lift: {0}")]
    InvalidLift(String),

    #[error("precondition violated at component {index}: {detail}")]
    Precondition { index: String, detail: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
