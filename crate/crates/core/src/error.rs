use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown alphabet preset `{0}`")]
    UnknownPreset(String),
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("alphabet needs at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet has {0} symbols, the maximum is 256")]
    AlphabetTooLarge(usize),
    #[error("duplicate character {0:?} in alphabet")]
    DuplicateSymbol(char),

    #[error("context order k must be at least 1")]
    InvalidOrder,
    #[error("key space overflow: alphabet size {alphabet_size} with k = {k} does not fit in 64 bits")]
    KeySpaceOverflow { k: usize, alphabet_size: usize },
    #[error("symbol index {index} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { index: u8, alphabet_size: usize },
    #[error("context has {got} symbols, model order is {expected}")]
    ContextLength { expected: usize, got: usize },
    #[error("target has {len} symbols, needs more than k = {k}")]
    TargetTooShort { len: usize, k: usize },
    #[error("smoothing factor must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("count overflow")]
    CountOverflow,

    #[error("classifier models disagree: {0}")]
    ModelMismatch(String),
    #[error("class labels must be distinct and nonempty")]
    InvalidLabels,

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: record {record}: {message}")]
    Parse {
        path: PathBuf,
        record: usize,
        message: String,
    },
    #[error("{0}: no usable records")]
    NoRecords(PathBuf),
    #[error("class `{0}` has no samples")]
    EmptyClass(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("invalid split ratios {0:?}")]
    InvalidRatios([f64; 3]),
    #[error("class `{label}` has {count} samples, at least {min} are required")]
    TooFewSamples {
        label: String,
        count: usize,
        min: usize,
    },

    #[error("empty input")]
    EmptyInput,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cell k={k}, alpha={alpha}: {source}")]
    Cell {
        k: usize,
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u16),
    #[error("checksum mismatch")]
    ChecksumMismatch,
    #[error("model entries are not strictly sorted")]
    UnsortedEntries,
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
