use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id {id:?}{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    DuplicateDocument { id: String, line: Option<usize> },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("examples mix target keys {0:?} and {1:?}")]
    MixedTargets(String, String),

    #[error("cannot train a decision list without examples")]
    EmptyTraining,

    #[error("smoothing constant must be positive and finite, got {0}")]
    InvalidSmoothing(f64),

    #[error("{decisions} decisions but {gold} gold labels")]
    LengthMismatch { decisions: usize, gold: usize },

    #[error("cannot build {k} folds from {units} units")]
    NotEnoughUnits { units: usize, k: usize },

    #[error("corpora {0:?} and {1:?} share no target keys")]
    NoSharedTargets(String, String),

    #[error("documents without a category: {}", .0.join(", "))]
    MissingCategory(Vec<String>),

    #[error("majority sense of an empty entry")]
    EmptyEntry,

    #[error("profiles are not comparable: {0}")]
    IncomparableProfiles(String),

    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSynth(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
