use alloc::string::String;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("variable x{index} at position {position} exceeds arity {arity}")]
    VariableOutOfRange {
        index: usize,
        arity: usize,
        position: usize,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtNegative(f64),
    #[error("non-finite result")]
    NonFinite,
    #[error("expected {expected} coordinates, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid knots on axis {axis}: {reason}")]
    InvalidKnots { axis: usize, reason: String },
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("cell {cell} on axis {axis} is not contractive (|a| = {slope})")]
    NonContractive { axis: usize, cell: usize, slope: f64 },
    #[error("value {value} lies outside cell [{lower}, {upper}]")]
    OutsideCell { value: f64, lower: f64, upper: f64 },
    #[error("point lies outside the domain on axis {axis} ({value})")]
    OutsideDomain { axis: usize, value: f64 },
    #[error("boundary label {label} is neither 0 nor {cells}")]
    InvalidBoundaryLabel { label: usize, cells: usize },
    #[error("scale function inadmissible: sup|alpha| + margin = {alpha_sup} >= 1")]
    Inadmissible { alpha_sup: f64 },
    #[error("base function differs from the germ at a box corner by {mismatch}")]
    CornerMismatch { mismatch: f64 },
    #[error("tolerance {tol} needs recursion depth {depth}, above the cap")]
    ToleranceInfeasible { tol: f64, depth: usize },
    #[error("iteration did not converge in {iterations} steps (residual {residual})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular normal system")]
    SingularSystem,
    #[error("degree schedule exhausted; best fit error {best}")]
    ScheduleExhausted { best: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
