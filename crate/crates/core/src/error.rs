use std::path::PathBuf;

use thiserror::Error;

use crate::model::PatternId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus contains no patterns")]
    EmptyCorpus,

    #[error("grammar contains no patterns")]
    EmptyGrammar,

    #[error("symbol type `{0}` has zero frequency")]
    ZeroFrequency(String),

    #[error("no cost recorded for symbol type `{0}`")]
    MissingCost(String),

    #[error("alignment is not projectable: two patterns from Old mismatch")]
    NotProjectable,

    #[error("no alignment found for `{0}`")]
    NoParse(String),

    #[error("code pattern is empty")]
    EmptyCode,

    #[error("no full alignment found for pattern {0:?} during sifting")]
    NoFullAlignment(PatternId),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("malformed grammar line {line}: {reason}")]
    MalformedGrammar { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
