use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet size must be at least 2 (got {0})")]
    AlphabetTooSmall(usize),
    #[error("alphabet size {0} is too large (maximum 10)")]
    AlphabetTooLarge(usize),
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),
    #[error("letter {letter} out of range for alphabet of size {arity}")]
    LetterOutOfRange { letter: usize, arity: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad permutation `{0}`")]
    BadPermutation(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("bad word `{0}`")]
    BadWord(String),
    #[error("rewrite rule `{0}` increases length")]
    LengthIncreasingRule(String),
    #[error("vertex set {0} is not pairwise incomparable")]
    NotAntichain(String),
    #[error("level {level} needs {points} points, above the cap of {cap} (use --force)")]
    QuotientTooLarge { level: usize, points: usize, cap: usize },
    #[error("word length exceeds the cap of {0} letters")]
    WordOverflow(u64),
    #[error("vertex {vertex} is deeper than the quotient level {level}")]
    VertexTooDeep { vertex: String, level: usize },
    #[error("vertex {0} is not in the supporting set")]
    NotInSupport(String),
    #[error("points must be distinct")]
    EqualPoints,
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
