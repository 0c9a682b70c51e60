//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by data loading, kernel evaluation, bound computation,
/// inference and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// CSV row with a different column count than the first row (1-based row).
    #[error("ragged CSV row {row}: expected {expected} columns, found {found}")]
    Format {
        row: usize,
        expected: usize,
        found: usize,
    },

    /// CSV cell that is neither a decimal number, empty, nor the NA token
    /// (1-based row/column).
    #[error("cannot parse cell at row {row}, column {col}: {token:?}")]
    Parse {
        row: usize,
        col: usize,
        token: String,
    },

    /// Input with no data rows.
    #[error("input contains no rows")]
    EmptyInput,

    /// Vectors or rows of different lengths where equal lengths are required.
    #[error("dimension mismatch: {left} vs {right}")]
    Dim { left: usize, right: usize },

    /// A statistic that needs more rows per sample than were supplied.
    #[error("sample too small: need at least {required} rows per sample, got n1={n1}, n2={n2}")]
    SampleSize {
        required: usize,
        n1: usize,
        n2: usize,
    },

    /// Kernel bandwidth that is not a positive finite number.
    #[error("kernel bandwidth must be positive and finite, got {value}")]
    InvalidBandwidth { value: f64 },

    /// Median heuristic invoked with fewer than two fully observed rows.
    #[error("median heuristic needs at least 2 fully observed rows, found {found}")]
    InsufficientCompleteRows { found: usize },

    /// Median pairwise distance of zero; every kernel value would be one.
    #[error("median pairwise distance is zero; bandwidth scale is degenerate")]
    DegenerateScale,

    /// T-function bound requested for a spec without any points.
    #[error("T-function spec has no points")]
    EmptySpec,

    /// Joint imputation grid larger than the configured cap.
    #[error("imputation grid of size {size} exceeds cap {cap}")]
    GridTooLarge { size: u128, cap: u128 },

    /// An operation that needs at least one fully observed row found none.
    #[error("no fully observed rows available")]
    NoCompleteRows,

    /// Imputation with an empty donor pool (1-based row).
    #[error("no observed donor values available for imputation at row {row}")]
    Impute { row: usize },

    /// Variance upper bound that is not positive; the studentized statistic
    /// is undefined and the test must not reject.
    #[error("variance bound is not positive ({value}); not rejecting")]
    DegenerateVariance { value: f64 },

    /// Invalid configuration value (permutation count, scenario file, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Method that requires fully observed data received masked input.
    #[error(
        "method requires fully observed data but {missing} cells are missing; \
         use the bound-based method instead"
    )]
    IncompleteData { missing: usize },

    /// Underlying I/O failure, with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
