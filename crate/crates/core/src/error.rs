use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("signal has {len} samples, fewer than one frame of {frame_len}")]
    SignalTooShort { len: usize, frame_len: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no voiced region found")]
    NoVoicedRegion,
    #[error("at least two periods are required, found {0}")]
    TooFewPeriods(usize),
    #[error("period amplitude must be positive (index {0})")]
    NonpositiveAmplitude(usize),
    #[error("cannot summarise an empty track")]
    EmptyTrack,
    #[error("cannot pool an empty sequence")]
    EmptySequence,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("id `{0}` is missing from the embedding set")]
    MissingId(String),
    #[error("non-finite value encountered")]
    NonFiniteValue,
    #[error("GAD-7 score {0} is outside 0..=21")]
    ScoreOutOfRange(i64),
    #[error("nothing to split: no entries")]
    EmptyClass,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("sample weight at index {0} is not positive")]
    NonpositiveWeight(usize),
    #[error("operation requires a {expected} model, got {found}")]
    WrongModelKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("no positive labels present")]
    NoPositives,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}
