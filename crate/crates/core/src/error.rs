use thiserror::Error;

/// Domain errors shared across the crate.
///
/// `code()` is the stable machine-readable name emitted by the CLI; the
/// `Display` text is free-form detail for humans.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("not invertible in the Laurent-polynomial base ring: {0}")]
    NotInvertible(String),
    #[error("model not adapted: {0}")]
    ModelNotAdapted(String),
    #[error("non-integral slope: {0}")]
    NonIntegralSlope(String),
    #[error("divisor is not principal: {0}")]
    NotPrincipal(String),
    #[error("singular curve: the discriminant vanishes identically")]
    SingularCurve,
    #[error("residue characteristic {0} is unsupported (need 0 or a prime >= 5)")]
    ResidueCharUnsupported(u64),
    #[error("no minimal twist over the available center pool: {0}")]
    TwistInfeasible(String),
    #[error("subgroup closure exceeded the cap of {0} elements")]
    CapExceeded(usize),
    #[error("not a transvection: {0}")]
    NotTransvection(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("j-invariant has nonnegative valuation here: {0}")]
    NotNonIntegralJ(String),
    #[error("Hasse invariant undefined: {0}")]
    UndefinedHasse(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable identifier for machine consumption (CLI error JSON).
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::NotInvertible(_) => "NotInvertible",
            Error::ModelNotAdapted(_) => "ModelNotAdapted",
            Error::NonIntegralSlope(_) => "NonIntegralSlope",
            Error::NotPrincipal(_) => "NotPrincipal",
            Error::SingularCurve => "SingularCurve",
            Error::ResidueCharUnsupported(_) => "ResidueCharUnsupported",
            Error::TwistInfeasible(_) => "TwistInfeasible",
            Error::CapExceeded(_) => "CapExceeded",
            Error::NotTransvection(_) => "NotTransvection",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::NotNonIntegralJ(_) => "NotNonIntegralJ",
            Error::UndefinedHasse(_) => "UndefinedHasse",
            Error::Parse(_) => "Parse",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
