use thiserror::Error;

#[derive(Debug, Error)]
pub enum MipError {
    #[error("invalid variable bounds: lo={lo} hi={hi}")]
    InvalidBounds { lo: f64, hi: f64 },

    #[error("constraint references no variables")]
    EmptyConstraint,

    #[error("unknown variable id {0} (model has {1} variables)")]
    UnknownVariable(usize, usize),

    #[error("non-finite coefficient {value} for variable id {var}")]
    NonFiniteCoefficient { var: usize, value: f64 },

    #[error("non-finite right-hand side {0}")]
    NonFiniteRhs(f64),

    #[error("nonconvex objective rejected: quadratic part is not positive semidefinite")]
    NonConvexObjective,

    #[error("quadratic objective terms are restricted to continuous variables (got binary id {0})")]
    QuadraticOnBinary(usize),

    #[error("model has no objective set")]
    NoObjective,

    #[error("LP parse error at line {line}: {msg}")]
    LpParse { line: usize, msg: String },

    #[error("solver internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, MipError>;
