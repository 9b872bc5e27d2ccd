use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("line {line}: unknown phoneme symbol {symbol:?}")]
    UnknownSymbol { line: usize, symbol: String },

    #[error("invalid phoneme symbol {0:?}")]
    InvalidSymbol(String),

    #[error("ensemble for {utterance_id:?} has {found} hypotheses but backend declares M={expected}")]
    EnsembleArityError {
        utterance_id: String,
        expected: usize,
        found: usize,
    },

    #[error("ensemble references unknown utterance {0:?}")]
    UnknownUtterance(String),

    #[error("ensemble records disagree on backend metadata ({0:?} vs {1:?})")]
    MixedBackends(String, String),

    #[error("word {0:?} is not in the lexicon")]
    OovWord(String),

    #[error("the deletion symbol cannot appear in an input sequence")]
    IllegalSymbol,

    #[error("no phoneme statistics to normalize")]
    EmptyStats,

    #[error("phoneme {0:?} has no score in the table")]
    UnscoredPhoneme(String),

    #[error("no utterance scores to map")]
    EmptyScores,

    #[error("invalid weight {weight} for {id:?}")]
    InvalidWeight { id: String, weight: f64 },

    #[error("invalid score weights: {0}")]
    InvalidScoreWeights(String),

    #[error("labels need at least one difficult and one non-difficult scored phoneme")]
    DegenerateLabels,

    #[error("utterance {0:?} has an empty reference phoneme sequence")]
    EmptyReferenceSequence(String),

    #[error("reference text is empty after normalization")]
    EmptyReference,

    #[error("split sets differ between runs: {0}")]
    SplitMismatch(String),

    #[error("audio format mismatch: {0}")]
    FormatMismatch(String),

    #[error("unsupported audio encoding: {0}")]
    UnsupportedEncoding(String),

    #[error("wav error in {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::ParseError {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Wav { source, .. } => matches!(source, hound::Error::IoError(_)),
            _ => false,
        }
    }
}
