use std::fmt;
use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every module in the crate.
#[derive(Debug)]
pub enum Error {
    /// A numeric argument fell outside a function's mathematical domain
    /// (NaN where a probability was expected, odd n where even is required,
    /// a p-value outside [0, 1], ...).
    Domain(String),
    /// A structurally invalid configuration: bad generator parameters,
    /// malformed seed files, mismatched lengths, unusable flag combinations.
    Config(String),
    /// A requested value exceeds a documented implementation limit
    /// (bit widths above 64, exact paths past their size cap, overflow).
    Unsupported(String),
    /// A finite bit source ran out; `position` is the number of bits that
    /// were successfully delivered before exhaustion.
    Exhausted { position: u64 },
    /// An underlying I/O failure (seed files, bit files, report output).
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::Exhausted { position } => {
                write!(f, "bit source exhausted after {position} bits")
            }
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}
