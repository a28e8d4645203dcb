use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a matrix fails the non-degeneracy test.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum DegeneracyReason {
    Empty,
    RaggedRows,
    TooFewColumns { rows: usize, cols: usize },
    RankDeficient { rank: usize, rows: usize },
    /// Some nonzero row-span vector is supported on columns `{i, j}` (0-based).
    BinarySubsystem { i: usize, j: usize, witness: Vec<String> },
}

impl fmt::Display for DegeneracyReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegeneracyReason::Empty => write!(f, "empty matrix"),
            DegeneracyReason::RaggedRows => write!(f, "rows have different lengths"),
            DegeneracyReason::TooFewColumns { rows, cols } => {
                write!(f, "need at least rows + 2 columns, got {rows}x{cols}")
            }
            DegeneracyReason::RankDeficient { rank, rows } => {
                write!(f, "rank deficient: rank {rank} < {rows} rows")
            }
            DegeneracyReason::BinarySubsystem { i, j, witness } => write!(
                f,
                "row span contains ({}) with at most two nonzero entries (columns {i}, {j})",
                witness.join(", ")
            ),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{what}: requested {requested} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        requested: u64,
        cap: u64,
    },
    #[error("table covers [1, {limit}] but {needed} is required")]
    TableTooSmall { needed: u64, limit: u64 },
    #[error("degenerate system: {0}")]
    DegenerateSystem(DegeneracyReason),
    #[error("null space over F_{p} has {points} points, above the enumeration cap {cap}")]
    EnumerationTooLarge { p: u64, points: u128, cap: u128 },
    #[error("exact counting needs at most 2 free coordinates, system has {free}")]
    FreeRankTooLarge { free: usize },
    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NotConverged { iterations: usize, estimate: f64 },
    #[error("only {count} conditioning events, need at least {needed}")]
    InsufficientSample { count: u64, needed: u64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("point {point} lies outside the support")]
    OutsideSupport { point: i64 },
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the caller's data rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::NotConverged { .. })
    }
}
