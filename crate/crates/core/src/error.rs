use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OctoError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is not an odd prime")]
    EvenCharacteristic(u64),
    #[error("prime {0} is outside the supported range")]
    PrimeOutOfRange(u64),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(u32, u32),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("residue {value} is not canonical mod {p}")]
    NonCanonical { value: u64, p: u32 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("octonion has nonzero real part")]
    NotImaginary,
    #[error("invalid basic triple: {0}")]
    InvalidTriple(&'static str),
    #[error("automorphism construction failed on basis pair ({0}, {1})")]
    ConstructionFailure(usize, usize),
    #[error("rejection sampling exceeded {0} attempts")]
    SamplingExhausted(u64),
    #[error("p = {0} is too large for exhaustive enumeration (max {1})")]
    PrimeTooLarge(u32, u32),
    #[error("spinning requires a nonzero vector")]
    ZeroVector,
    #[error("matrix does not stabilise the subspace: basis row {row} leaves it")]
    NotInvariant { row: usize },
    #[error("no non-stabilising isometry found in {0} attempts")]
    SearchExhausted(u64),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OctoError>;
