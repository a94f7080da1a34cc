use crate::kdd::AttackCategory;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected 41 or 42 fields, found {found}")]
    FieldCount { line: usize, found: usize },

    #[error("line {line}, field {field}: {reason} ({text:?})")]
    FieldType {
        line: usize,
        field: usize,
        text: String,
        reason: &'static str,
    },

    #[error("unknown attack label {0:?}; register it in the category map")]
    UnknownLabel(String),

    #[error("record {0} has no label")]
    MissingLabel(usize),

    #[error("not enough {category} records: requested {requested}, available {available}")]
    InsufficientRecords {
        category: AttackCategory,
        requested: usize,
        available: usize,
    },

    #[error("sample spec counts sum to {sum}, but total is {total}")]
    SampleTotal { sum: usize, total: usize },

    #[error("requested {requested} test records from a dataset of {available}")]
    HoldoutTooLarge { requested: usize, available: usize },

    #[error("record does not match schema: {0}")]
    SchemaMismatch(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("every training record is {0}; cannot fit a discriminative model")]
    SingleClass(AttackCategory),

    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),

    #[error("predictions ({predictions}) and truths ({truths}) differ in length")]
    LengthMismatch { predictions: usize, truths: usize },

    #[error("cannot compute metrics over zero instances")]
    Empty,

    #[error("rate for {0} is undefined on this confusion matrix")]
    UndefinedRate(AttackCategory),

    #[error("no classifier qualifies for {category} (aa_min {aa_min}, tt_budget {tt_budget})")]
    NoQualifiedClassifier {
        category: AttackCategory,
        aa_min: f64,
        tt_budget: String,
    },

    #[error("training the {category} member failed: {source}")]
    Member {
        category: AttackCategory,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("model encoding: {0}")]
    Encoding(#[from] bincode::Error),
}
