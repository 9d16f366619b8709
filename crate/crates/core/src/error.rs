use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("variable {name} is out of range (nvars = {nvars})")]
    VariableOutOfRange { name: String, nvars: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumeration of {needed} items exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("table has {got} entries, expected {expected}")]
    IncompleteTable { expected: usize, got: usize },
    #[error("not a form: {0}")]
    NotAForm(String),
    #[error("polynomial is not a function of the given tuple")]
    NotAMember,
    #[error("outer map failed to recompose after pruning")]
    PruneVerificationFailed,
    #[error("rank oracle could not decide rank < {threshold} for {poly}")]
    OracleInconclusive { poly: String, threshold: u64 },
    #[error("operation needs odd characteristic")]
    EvenCharacteristic,
    #[error("bias is zero; rank lower bound capped at {cap}")]
    ZeroBias { cap: u32 },
    #[error("first component does not have maximal degree")]
    NotMaxDegreeFirst,
    #[error("tuple is already rank-regular at this threshold")]
    ActuallyRegular,
    #[error("components must share one degree >= 2")]
    UnequalDegrees,
    #[error("degree {degree} is not below the characteristic {p}")]
    CharTooSmall { degree: u32, p: u32 },
    #[error("no certified decomposition after {attempts} attempts (best defect {best_defect})")]
    EscalationExhausted { attempts: u32, best_defect: String },
    #[error("top-degree part of the span is covered by low-rank forms")]
    EmptyTop,
    #[error("polynomial is zero")]
    ZeroPolynomial,
    #[error("no outer map depends on the first coordinate")]
    NoDependentComponent,
    #[error("monomial degree {degree} exceeds {bound}")]
    DegreeOverflow { degree: u32, bound: u32 },
    #[error("refinement exceeded {bound} rounds")]
    RoundBoundViolated { bound: u32 },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Stable identifier used in JSON output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::Parse { .. } => "ParseError",
            Error::VariableOutOfRange { .. } => "VariableOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::IncompleteTable { .. } => "IncompleteTable",
            Error::NotAForm(_) => "NotAForm",
            Error::NotAMember => "NotAMember",
            Error::PruneVerificationFailed => "PruneVerificationFailed",
            Error::OracleInconclusive { .. } => "OracleInconclusive",
            Error::EvenCharacteristic => "EvenCharacteristic",
            Error::ZeroBias { .. } => "ZeroBias",
            Error::NotMaxDegreeFirst => "NotMaxDegreeFirst",
            Error::ActuallyRegular => "ActuallyRegular",
            Error::UnequalDegrees => "UnequalDegrees",
            Error::CharTooSmall { .. } => "CharTooSmall",
            Error::EscalationExhausted { .. } => "EscalationExhausted",
            Error::EmptyTop => "EmptyTop",
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::NoDependentComponent => "NoDependentComponent",
            Error::DegreeOverflow { .. } => "DegreeOverflow",
            Error::RoundBoundViolated { .. } => "RoundBoundViolated",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::Invalid(_) => "Invalid",
        }
    }

    /// True for outcomes that are honest "could not certify" answers rather
    /// than misuse.
    pub fn is_non_certification(&self) -> bool {
        matches!(
            self,
            Error::EscalationExhausted { .. }
                | Error::OracleInconclusive { .. }
                | Error::VerificationFailed(_)
                | Error::EmptyTop
        )
    }
}
