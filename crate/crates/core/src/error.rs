use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability tensor has {found} entries, alphabets require {expected}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("negative probability {value} at flat index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, deviating from 1 beyond tolerance")]
    NotNormalized { sum: f64 },

    #[error("non-finite probability at flat index {0}")]
    NonFinite(usize),

    #[error("empty alphabet for variable `{0}`")]
    EmptyAlphabet(String),

    #[error("duplicate symbol `{symbol}` in alphabet of `{variable}`")]
    DuplicateSymbol { variable: String, symbol: String },

    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` appears in more than one group")]
    OverlappingGroups(String),

    #[error("empty variable group")]
    EmptyGroup,

    #[error("alphabet of `{0}` does not match")]
    AlphabetMismatch(String),

    #[error("conditioning set must be a proper nonempty subset of the variables")]
    ImproperConditioning,

    #[error("invalid distortion measure: {0}")]
    InvalidDistortion(String),

    #[error("distortion target {target} below minimal achievable distortion {minimum}")]
    InfeasibleTarget { target: f64, minimum: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
