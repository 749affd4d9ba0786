use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("step size too large: dt = {dt_us} μs with {rate_name} = {value_khz} kHz gives dt·2π·rate = {product:.4} (limit 0.1)")]
    StepSize {
        rate_name: String,
        value_khz: f64,
        dt_us: f64,
        product: f64,
    },

    #[error("outside model regime: {0}")]
    Regime(String),

    #[error("no decay: {0}")]
    NoDecay(String),

    #[error("pulse detection failed: {0}")]
    Detection(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("missing channel `{0}`")]
    Schema(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("config error ({location}) key `{key}`: {message}")]
    Config {
        location: String,
        key: String,
        message: String,
    },

    #[error("unknown scenario `{name}`; valid scenarios: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("render error: {0}")]
    Render(String),

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

    /// Process exit code for the CLI: 2 for configuration/usage problems,
    /// 3 for numerical or regime failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownScenario { .. } => 2,
            Error::Io { .. } => 1,
            _ => 3,
        }
    }
}
