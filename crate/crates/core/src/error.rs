use std::path::PathBuf;

use thiserror::Error;

use crate::model::VarId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Model,
    Ingest,
    Learning,
    Inference,
    Fairness,
    Evaluation,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    // model
    #[error("invalid variable {name:?}: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("variable {0} appears twice in a factor scope")]
    DuplicateScopeVariable(VarId),
    #[error("table has {actual} entries, scope requires {expected}")]
    TableLength { expected: usize, actual: usize },
    #[error("negative or NaN entry {value} in a linear factor")]
    NegativeEntry { value: f64 },
    #[error("factors use different representations")]
    RepresentationMismatch,
    #[error("variable {var} has cardinality {left} in one factor and {right} in another")]
    CardinalityMismatch {
        var: VarId,
        left: usize,
        right: usize,
    },
    #[error("variable {0} is not in the factor scope")]
    NotInScope(VarId),
    #[error("state {state} out of range for variable {var} (cardinality {cardinality})")]
    StateOutOfRange {
        var: VarId,
        state: usize,
        cardinality: usize,
    },
    #[error("variable {0} is not bound by the assignment")]
    Unbound(VarId),
    #[error("CPT of {child} is not normalised: parent configuration {config} sums to {sum}")]
    NotNormalised {
        child: VarId,
        config: usize,
        sum: f64,
    },
    #[error("CPT of {child} does not match the declared parents")]
    CptScope { child: VarId },
    #[error("variable {0} has no CPT")]
    MissingCpt(VarId),
    #[error("directed cycle through variable {0}")]
    Cyclic(VarId),
    #[error("model has {0} target variables, expected at most one")]
    TargetCount(usize),
    #[error("variable {0} is not covered by any potential")]
    Uncovered(VarId),
    #[error("division by an exact zero while forming a ratio potential for {0}")]
    ZeroDenominator(VarId),

    // ingest
    #[error("column {0:?} not found in the header")]
    MissingColumn(String),
    #[error("column {column:?} row {row}: {value:?} is not numeric")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("no rows left after dropping rows with missing values")]
    NoRows,
    #[error("empty input")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed dataset: {0}")]
    MalformedDataset(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("metadata error: {0}")]
    Json(#[from] serde_json::Error),

    // learning
    #[error("equivalent sample size must be positive, got {0}")]
    NonPositiveEss(f64),
    #[error("forced arcs contain a directed cycle")]
    CyclicForcedArcs,
    #[error("arc {0} -> {1} is both forced and forbidden")]
    ConflictingArc(VarId, VarId),
    #[error("malformed network file: {0}")]
    NetworkFormat(String),

    // inference
    #[error("evidence has zero probability")]
    ZeroEvidence,
    #[error("variable {0} is both free and observed")]
    FreeAndObserved(VarId),
    #[error("query variable {0} is observed")]
    QueryObserved(VarId),

    // fairness
    #[error("target must be binary, found {0} states")]
    NonBinaryTarget(usize),
    #[error("model has no target variable")]
    NoTarget,
    #[error("distributions have {0} and {1} states")]
    LengthMismatch(usize, usize),
    #[error("brute force needs {needed} evaluations, cap is {cap}")]
    CapExceeded { needed: u128, cap: u64 },

    // evaluation
    #[error("fold {fold}: training slice lacks target class {class}")]
    MissingClass { fold: usize, class: usize },
    #[error("no records to summarise")]
    NoRecords,
    #[error("record {0} lacks oracle timings")]
    MissingTimings(usize),
    #[error("fold {fold}: {source}")]
    InFold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> Category {
        use Error::*;
        match self {
            InvalidVariable { .. }
            | UnknownVariable(_)
            | DuplicateScopeVariable(_)
            | TableLength { .. }
            | NegativeEntry { .. }
            | RepresentationMismatch
            | CardinalityMismatch { .. }
            | NotInScope(_)
            | StateOutOfRange { .. }
            | Unbound(_)
            | NotNormalised { .. }
            | CptScope { .. }
            | MissingCpt(_)
            | Cyclic(_)
            | TargetCount(_)
            | Uncovered(_)
            | ZeroDenominator(_) => Category::Model,
            MissingColumn(_)
            | NonNumeric { .. }
            | NoRows
            | EmptyInput
            | Config(_)
            | MalformedDataset(_)
            | Csv(_)
            | Json(_) => Category::Ingest,
            NonPositiveEss(_) | CyclicForcedArcs | ConflictingArc(..) | NetworkFormat(_) => {
                Category::Learning
            }
            ZeroEvidence | FreeAndObserved(_) | QueryObserved(_) => Category::Inference,
            NonBinaryTarget(_) | NoTarget | LengthMismatch(..) | CapExceeded { .. } => {
                Category::Fairness
            }
            MissingClass { .. } => Category::Learning,
            NoRecords | MissingTimings(_) => Category::Evaluation,
            InFold { source, .. } => source.category(),
            Io { .. } => Category::Io,
        }
    }
}
