use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown preset `{0}` (expected S, M or L)")]
    InvalidPreset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: schema error at line {line}, column {column}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema version mismatch: found {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("search space of {size} candidate assignments exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("no feasible solution within bounds (on-demand cap {on_demand_cap})")]
    Infeasible { on_demand_cap: u64 },

    #[error("{variable} = {value} is not representable (maximum {max})")]
    OutOfRange {
        variable: String,
        value: u64,
        max: u64,
    },

    #[error("penalty weights must be positive (alpha = {alpha}, beta = {beta})")]
    InvalidPenalty { alpha: f64, beta: f64 },

    #[error(
        "encoding cap 2^{k_bits}-1 exceeds max_reserved {max_reserved}; \
         the linking penalty needs max_reserved >= 2^K - 1"
    )]
    UnsupportedCap { k_bits: u32, max_reserved: u64 },

    #[error("encoding does not match penalty mode: {0}")]
    EncodingMode(String),

    #[error("problem has {num_vars} variables; exhaustive search is capped at {cap}")]
    TooLarge { num_vars: usize, cap: usize },

    #[error("bitstring length {found} does not match {expected} variables")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("all {0} restarts diverged")]
    Diverged(usize),

    #[error("no results found in {0}")]
    NoResults(PathBuf),

    #[error("corrupt results file {path}: {message}")]
    CorruptResults { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
