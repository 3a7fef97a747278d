use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed BVH syntax.
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    /// A MOTION row does not carry the number of values the HIERARCHY declares.
    #[error("line {line}: expected {expected} channel values, found {found}")]
    ChannelCount { line: usize, expected: usize, found: usize },

    /// The number of MOTION rows differs from the `Frames:` header.
    #[error("frame count mismatch: header declares {declared}, found {found} rows")]
    FrameCount { declared: usize, found: usize },

    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),

    #[error("invalid clip: {0}")]
    InvalidClip(String),

    #[error("bone index {index} out of range for a skeleton with {count} bones")]
    BoneIndex { index: usize, count: usize },

    /// A channel jumps by exactly pi between two frames, so the unwrapping
    /// direction is undetermined.
    #[error("ambiguous unwrap: channel {channel} jumps by exactly pi at frame {frame}")]
    AmbiguousUnwrap { channel: usize, frame: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The discrete derivative vanishes, so the curve is not an immersion.
    #[error("immersion violated: vanishing derivative at sample {sample}")]
    Immersion { sample: usize },

    #[error("curve is not closed: gap {gap:e} exceeds tolerance {tolerance:e}")]
    NotClosed { gap: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular closure Jacobian")]
    SingularJacobian,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The two points are antipodal on the unit sphere; the geodesic is not unique.
    #[error("antipodal curves (inner product {inner}): geodesic is not unique")]
    Antipodal { inner: f64 },

    /// The clip is too far from periodic to be cyclified.
    #[error("clip is not nearly periodic: channel {channel} gap {gap:.4} rad exceeds bound {bound:.4}")]
    NotPeriodic { channel: usize, gap: f64, bound: f64 },

    #[error("reparametrization is not strictly increasing at sample {sample}")]
    NonMonotone { sample: usize },

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("malformed file: {0}")]
    Format(String),

    /// Failure attributed to one clip of a corpus.
    #[error("{label}: {source}")]
    Clip {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }

    /// Strips any [`Error::Clip`] wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::Clip { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
