use std::fmt;

/// Errors surfaced by guard checks and domain validation.
///
/// Every counting and construction routine is total on its documented
/// domain; these variants mark the edges of that domain rather than
/// internal failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The distinct-sum bit sieve would exceed the configured memory cap.
    SieveTooLarge { required_bytes: u64, cap_bytes: u64 },
    /// A size guard was exceeded.
    Guard {
        what: &'static str,
        limit: u64,
        actual: u64,
    },
    /// 64-bit overflow while accumulating sums.
    Overflow(&'static str),
    /// A parameter lies outside its mathematical domain.
    Domain(String),
    /// An input violates the operation's precondition.
    Precondition(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SieveTooLarge {
                required_bytes,
                cap_bytes,
            } => write!(
                f,
                "sieve too large: needs {required_bytes} bytes, cap is {cap_bytes} bytes"
            ),
            Error::Guard {
                what,
                limit,
                actual,
            } => write!(f, "guard exceeded: {what} is {actual}, limit {limit}"),
            Error::Overflow(what) => write!(f, "64-bit overflow in {what}"),
            Error::Domain(msg) => write!(f, "domain violation: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
