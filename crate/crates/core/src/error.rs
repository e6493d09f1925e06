use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants are grouped by the subsystem that produces them so the CLI can
/// map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mean has imaginary part {imag:e} on a declared-real function")]
    NonRealMean { imag: f64 },

    #[error("jet order {have} is insufficient: depth {depth} needs K_t >= {required}")]
    InsufficientJetOrder {
        have: usize,
        required: usize,
        depth: i32,
    },

    #[error("t-derivative requested beyond jet order {order}")]
    JetOrderExceeded { order: usize },

    #[error("weight function must be strictly positive (min over grid = {min:e})")]
    NonPositiveWeight { min: f64 },

    #[error("unsupported depth {depth}: needs composition order {needed}, configured maximum is {max}")]
    UnsupportedDepth { depth: i32, needed: usize, max: usize },

    #[error("symbol is not diagonal at degree {degree} (x-variation {variation:e})")]
    NotDiagonal { degree: i32, variation: f64 },

    #[error("symbol is missing the component of degree {degree}")]
    MissingComponent { degree: i32 },

    #[error("coordinate inversion failed to converge at x = {x}")]
    InversionFailed { x: f64 },

    #[error("lambda = {lambda} is within the pencil margin of a Dirichlet eigenvalue (mode {mode})")]
    Pencil { lambda: f64, mode: usize },

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("window too small: {usable} usable points, need at least {needed}")]
    WindowTooSmall { usable: usize, needed: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("horizon too small for component alpha = {alpha}: {detail}")]
    HorizonTooSmall { alpha: f64, detail: String },

    #[error("ambiguous clustering for alpha = {alpha}: {detail}; residual scatter {scatter:?}")]
    Ambiguous {
        alpha: f64,
        detail: String,
        scatter: Vec<f64>,
    },

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
