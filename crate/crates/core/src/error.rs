use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("potential V must be positive, found minimum {min}")]
    NonPositivePotential { min: f64 },

    #[error("L^p exponent must be at least 1, got {0}")]
    InvalidExponent(f64),

    #[error("the field is identically zero")]
    ZeroField,

    #[error("malformed field header: {0}")]
    MalformedHeader(String),

    #[error("field payload has {found} bytes, header declares {expected}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("unsupported field schema {0:?}")]
    SchemaMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("potential hypothesis violated: {0}")]
    Potential(String),

    #[error("expression error at byte {pos}: {msg}")]
    Expr { pos: usize, msg: String },

    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("no sign change of the Nehari scalar on [{lo:e}, {hi:e}]: every attractive term vanishes on this field")]
    DegenerateProjection { lo: f64, hi: f64 },

    #[error("invalid autonomous parameters: {0}")]
    InvalidParameters(String),

    /// `point` is `None` for the limiting problem or a bare coefficient set.
    #[error("frozen-coefficient problem{} is degenerate: {reason}", point.map(|p| format!(" at {p:?}")).unwrap_or_default())]
    DegenerateFrozen { point: Option<[f64; 3]>, reason: String },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("every multistart run failed")]
    AllStartsFailed,

    #[error("critical weight K vanishes identically; the critical threshold is undefined")]
    ZeroCriticalWeight,

    #[error("bubble width {sigma} is too large for cutoff radius {radius}")]
    BubbleCutoff { sigma: f64, radius: f64 },

    #[error("decay fit failed: {0}")]
    DecayFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
