use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A mathematical precondition was violated (angle out of range,
    /// non-unit direction, coordinate outside its domain, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An API contract between modules was violated (mismatched
    /// geometries, wrong chroma format, empty input, ...).
    #[error("contract error: {0}")]
    Contract(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A codec adapter failed (nonzero exit, missing output, bad
    /// reconstruction geometry). Captured tool output is included when
    /// available.
    #[error("codec error: {0}")]
    Codec(String),

    /// A cached pipeline intermediate is missing or unreadable.
    #[error("pipeline state error: {0}")]
    PipelineState(String),

    /// Sample data outside the legal range for its declared bit depth.
    #[error("data error: {0}")]
    Data(String),

    /// Rate-distortion curves whose quality (or rate) ranges do not overlap.
    #[error("disjoint curves: {0}")]
    DisjointCurves(String),

    /// Too few rate-distortion points to fit a curve.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: config, codec and I/O failures get
    /// distinct codes so scripted sweeps can tell them apart.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Codec(_) => 3,
            Error::Io { .. } | Error::PipelineState(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
