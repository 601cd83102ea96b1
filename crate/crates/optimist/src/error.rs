use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is missing, malformed or out of range.
    #[error("config: {0}")]
    Config(String),
    /// Input data does not match the expected schema.
    #[error("{path}: line {line}: {msg}")]
    Data {
        path: String,
        line: u64,
        msg: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] optimist_core::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for data problems.
    pub fn exit_code(&self) -> i32 {
        use optimist_core::Error as C;
        match self {
            Error::Config(_) => 2,
            Error::Core(C::Config(_) | C::InvalidDesign(_)) => 2,
            Error::Data { .. } | Error::Io { .. } | Error::Core(_) => 3,
        }
    }
}
