use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("bad selection: {0}")]
    BadSelection(String),

    #[error("need at least two variables")]
    TooFewVariables,

    #[error("label {value} out of range for cardinality {cardinality}")]
    LabelOutOfRange { value: u32, cardinality: u32 },

    #[error("cardinality must be at least {min}, got {got}")]
    InvalidCardinality { min: u64, got: u64 },

    #[error("cardinality overflow")]
    CardinalityOverflow,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("class index {index} out of range 1..={classes}")]
    ClassIndexOutOfRange { index: u32, classes: u32 },

    /// An estimator produced a value outside its mathematical range by more
    /// than floating point slack.
    #[error("internal consistency violation: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
