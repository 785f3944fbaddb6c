use thiserror::Error;

/// Errors raised anywhere in the simulator.
///
/// Each variant maps onto one of the CLI exit codes via [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code: 2 config, 3 parse, 4 numerical, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::Parse { .. } => 3,
            Error::Numerical(_) | Error::DegenerateChannel(_) => 4,
            Error::Io(_) => 1,
        }
    }
}
