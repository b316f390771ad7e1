use std::fmt;

/// Pipeline stage, used to label errors surfaced by [`crate::pipeline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Kernel,
    Spectral,
    Harmonic,
    Extension,
    Dynamics,
    Persistence,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Ingest => "ingest",
            Stage::Kernel => "kernel",
            Stage::Spectral => "spectral",
            Stage::Harmonic => "harmonic",
            Stage::Extension => "out-of-sample",
            Stage::Dynamics => "dynamics",
            Stage::Persistence => "persistence",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}: row {row}: {message}")]
    Parse {
        source_name: String,
        row: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("kernel row {row} has zero mass; increase epsilon or lower the prune threshold")]
    ZeroDegree { row: usize },

    #[error(
        "harmonic design is rank deficient: frequencies {first} and {second} are (nearly) collinear"
    )]
    RankDeficient { first: f64, second: f64 },

    #[error("point outside kernel support: mean kernel mass {mass:e} below {threshold:e}")]
    OutOfSupport { mass: f64, threshold: f64 },

    #[error("rollout produced a non-finite state at step {step}")]
    Diverged { step: usize },

    #[error("channel {channel} of the reference has zero sup-norm")]
    ZeroAmplitude { channel: usize },

    #[error("model file: {0}")]
    Format(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, with stage labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
