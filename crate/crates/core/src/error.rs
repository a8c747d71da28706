use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty geometry")]
    EmptyGeometry,
    #[error("degenerate extent")]
    DegenerateExtent,
    #[error("atlas overflow: increase resolution")]
    AtlasOverflow,
    #[error("grid has no color volume")]
    MissingColorVolume,
    #[error("no surface crossing")]
    NoSurfaceCrossing,
    #[error("mesh has zero total surface area")]
    ZeroArea,
    #[error("resolution mismatch: expected {expected:?}, got {actual:?}")]
    ResolutionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate schedule: first and last sqrt(alpha_bar) coincide")]
    DegenerateSchedule,
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
    #[error("config: {0}")]
    Config(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotConverged { .. } | Error::DegenerateSchedule | Error::ZeroArea => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// Process exit code: 2 for input errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            3
        } else {
            2
        }
    }
}
