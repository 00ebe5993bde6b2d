use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator is zero")]
    ZeroDenominator,

    #[error("degree must be at least 2, got {0}")]
    DegreeTooSmall(u32),

    #[error("c = {0} has a finite critical orbit")]
    FiniteOrbit(String),

    #[error("a_{n} needs up to {bits} bits, over the {limit}-bit size guard")]
    SizeGuard { n: u32, bits: u64, limit: u64 },

    #[error("index {0} is outside the Zsigmondy range (n >= 2)")]
    IndexTooSmall(u32),

    #[error("orbit has {have} terms, index {want} requested")]
    NotExtended { have: u32, want: u32 },

    #[error("{0} divides b, so it divides no a_n")]
    PrimeDividesDenominator(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("tail certification failed beyond n_probe = {0}; raise n_probe")]
    TailNotCertified(u32),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),

    #[error("consistency mismatch: {message}")]
    Mismatch {
        message: String,
        evidence: Box<serde_json::Value>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used on the CLI error stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroDenominator => "zero_denominator",
            Error::DegreeTooSmall(_) => "degree_too_small",
            Error::FiniteOrbit(_) => "finite_orbit",
            Error::SizeGuard { .. } => "size_guard",
            Error::IndexTooSmall(_) => "index_too_small",
            Error::NotExtended { .. } => "not_extended",
            Error::PrimeDividesDenominator(_) => "prime_divides_denominator",
            Error::NotPrime(_) => "not_prime",
            Error::Precondition(_) => "precondition",
            Error::Invariant(_) => "invariant",
            Error::TailNotCertified(_) => "tail_not_certified",
            Error::Inconclusive(_) => "inconclusive",
            Error::NoConvergence(_) => "no_convergence",
            Error::Mismatch { .. } => "mismatch",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
