use std::fmt;

/// Which of the two triplet feature maps an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    K1,
    K2,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::K1 => f.write_str("k1"),
            FeatureKind::K2 => f.write_str("k2"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for {n} objects (line {line})")]
    IndexOutOfRange { line: usize, index: usize, n: usize },

    #[error("triple ({0},{1},{2}) does not name three distinct objects (line {3})")]
    DegenerateTriple(usize, usize, usize, usize),

    #[error("no triplets given")]
    EmptyInput,

    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),

    #[error("dissimilarity tie at anchor {anchor}: d({anchor},{first}) == d({anchor},{second})")]
    TieDetected { anchor: usize, first: usize, second: usize },

    #[error("objects never appearing as anchor: {0:?}")]
    MissingAnchor(Vec<usize>),

    #[error("objects never appearing as non-anchor: {0:?}")]
    MissingNonAnchor(Vec<usize>),

    #[error("contradicting triples for anchor {anchor} and pair ({first},{second}); resolve by majority or use the weighted map")]
    ContradictionPresent { anchor: usize, first: usize, second: usize },

    #[error("{kind} feature columns with zero weighted norm (all contradictions tied): {objects:?}")]
    ZeroColumn { kind: FeatureKind, objects: Vec<usize> },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("kernel weights must be strictly positive (mu1={mu1}, mu2={mu2})")]
    NonPositiveWeight { mu1: f64, mu2: f64 },

    #[error("matrix is not symmetric: |K[{row}][{col}] - K[{col}][{row}]| = {gap:e}")]
    NonSymmetric { row: usize, col: usize, gap: f64 },

    #[error("matrix is not positive semi-definite (smallest eigenvalue below {threshold:e}); run the diagonal dominance fix or check the kernel")]
    NotPsd { threshold: f64 },

    #[error("negative squared feature distance {value:e} between {first} and {second}")]
    NegativeSquaredDistance { first: usize, second: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short stable name of the variant, used for machine-parsable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DegenerateTriple(..) => "DegenerateTriple",
            Error::EmptyInput => "EmptyInput",
            Error::Parse { .. } => "Parse",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::NotAPermutation(_) => "NotAPermutation",
            Error::TieDetected { .. } => "TieDetected",
            Error::MissingAnchor(_) => "MissingAnchor",
            Error::MissingNonAnchor(_) => "MissingNonAnchor",
            Error::ContradictionPresent { .. } => "ContradictionPresent",
            Error::ZeroColumn { .. } => "ZeroColumn",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonPositiveWeight { .. } => "NonPositiveWeight",
            Error::NonSymmetric { .. } => "NonSymmetric",
            Error::NotPsd { .. } => "NotPsd",
            Error::NegativeSquaredDistance { .. } => "NegativeSquaredDistance",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DuplicatePoints(..) => "DuplicatePoints",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
