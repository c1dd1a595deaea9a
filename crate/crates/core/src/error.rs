use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column `{0}` is constant and cannot be standardized")]
    ConstantColumn(String),

    #[error("at least two rows are required, got {0}")]
    TooFewRows(usize),

    #[error("design is rank deficient (rank {rank} < {columns} fitted columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("{columns} fitted columns exceed {rows} observations")]
    Underdetermined { rows: usize, columns: usize },

    #[error("information criterion needs n >= 3, got n = {0}")]
    DegenerateGic(usize),

    #[error("all predictors are orthogonal to the outcome; no penalty grid exists")]
    DegenerateLambdaMax,

    #[error("interval has zero length")]
    ZeroLengthInterval,

    #[error("null bound requires at least one candidate coefficient")]
    EmptyCandidateSet,

    #[error("null bound variant `{0}` is undefined when n <= p")]
    NullBoundUndefined(&'static str),

    #[error("column `{0}` contains non-numeric values")]
    NonNumericColumn(String),

    #[error("outcome column `{0}` not found")]
    OutcomeMissing(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl Error {
    /// Short stable identifier, used to tag failed replications.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::ConstantColumn(_) => "constant_column",
            Error::TooFewRows(_) => "too_few_rows",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Underdetermined { .. } => "underdetermined",
            Error::DegenerateGic(_) => "degenerate_gic",
            Error::DegenerateLambdaMax => "degenerate_lambda_max",
            Error::ZeroLengthInterval => "zero_length_interval",
            Error::EmptyCandidateSet => "empty_candidate_set",
            Error::NullBoundUndefined(_) => "null_bound_undefined",
            Error::NonNumericColumn(_) => "non_numeric_column",
            Error::OutcomeMissing(_) => "outcome_missing",
            Error::Csv(_) => "csv",
        }
    }
}
