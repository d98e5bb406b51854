use thiserror::Error;

/// Every failure the library can report.
///
/// Variants split into input errors (bad arguments, malformed files) and
/// mathematical check failures (a certified computation did not reach the
/// asserted property). [`Error::is_check_failure`] tells them apart; the CLI
/// maps the former to exit code 2 and the latter to exit code 1.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("unsupported prime {0}: p must be an odd prime")]
    UnsupportedPrime(u64),
    #[error("division by an element that is zero to precision {0}")]
    DivisionByZeroToPrecision(i64),
    #[error("precision exhausted: result precision {0} is not positive")]
    PrecisionExhausted(i64),
    #[error("bad modulus: {0}")]
    BadModulus(String),
    #[error("cyclotomic modulus failed the Eisenstein self-check")]
    NotEisenstein,
    #[error("norm vanishes to working precision {0}")]
    NormPrecisionLoss(i64),
    #[error("operation unsupported for this ring: {0}")]
    UnsupportedRing(String),
    #[error("ring mismatch between operands")]
    RingMismatch,
    #[error("variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),
    #[error("argument has nonzero constant term")]
    NonzeroConstantTerm,
    #[error("exp does not converge: valuation {0} is not above 1/(p-1)")]
    ConvergenceViolation(String),
    #[error("formal group construction diverged at degree {0}")]
    ConstructionDiverged(u32),
    #[error("multiplier is not in Z_p")]
    NotIntegral,
    #[error("endomorphism series lost integrality at degree {0}")]
    IntegralityLost(u32),
    #[error("point is not in the open unit disk (coordinate valuation {0})")]
    NotInOpenDisk(String),
    #[error("tail too short: certified precision {got} below requested {wanted}")]
    TailTooShort { got: String, wanted: String },
    #[error("unsupported formal group kind: {0}")]
    UnsupportedKind(String),
    #[error("Jacobian entry is not a unit at the origin")]
    SingularAtOrigin,
    #[error("curve chart is invalid: {0}")]
    ChartInvalid(String),
    #[error("Newton polygon is degenerate: every coefficient vanishes to precision")]
    PolygonDegenerate,
    #[error("tower too deep: depth {0} exceeds the supported bound")]
    TowerTooDeep(u32),
    #[error("enumeration of {0} points exceeds the cap {1}")]
    EnumerationOverflow(usize, usize),
    #[error("level {0} exceeds the supported bound")]
    LevelTooDeep(u32),
    #[error("valuation mismatch: {0}")]
    ValuationMismatch(String),
    #[error("correction factor not integral at stage {stage} (valuation {valuation})")]
    IntegralityFailure { stage: u32, valuation: i64 },
    #[error("slope search exhausted at stage {0}")]
    SlopeExhaustion(u32),
    #[error("residual at pair {index} has valuation {valuation}, below {required}")]
    ResidualTooLarge { index: u32, valuation: i64, required: i64 },
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a mathematical assertion, as opposed to bad input.
    pub fn is_check_failure(&self) -> bool {
        matches!(
            self,
            Error::ConstructionDiverged(_)
                | Error::IntegralityLost(_)
                | Error::IntegralityFailure { .. }
                | Error::SlopeExhaustion(_)
                | Error::ResidualTooLarge { .. }
                | Error::CheckFailed(_)
                | Error::NormPrecisionLoss(_)
                | Error::TailTooShort { .. }
                | Error::PrecisionExhausted(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
