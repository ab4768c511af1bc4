use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate paper_id {0}")]
    DuplicatePaper(String),

    #[error("duplicate journal_id {0}")]
    DuplicateJournal(String),

    #[error("empty reference set")]
    EmptyReferenceSet,

    #[error("unknown journal_id {0}")]
    UnknownJournal(String),

    #[error("no citable items")]
    NoCitableItems,

    #[error("year with zero citable items")]
    ZeroPublicationYear,

    #[error("mean expected citation rate is zero")]
    ZeroMecr,

    #[error("expected citation rate is zero at index {0}")]
    ZeroExpected(usize),

    #[error("citing paper with zero references: {0}")]
    ZeroReferences(String),

    #[error("no citation count for paper {0}")]
    MissingCount(String),

    #[error("paper {0} is not a member of the reference set")]
    OutsideReferenceSet(String),

    #[error("empty unit of assessment")]
    EmptyUnit,

    #[error("degenerate pooled proportion")]
    DegeneratePooledProportion,

    #[error("zero variance")]
    ZeroVariance,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid evaluation scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
