//! Error plumbing: every failure is classified into one of the process
//! exit codes (2 = parse or I/O, 3 = validation, 4 = divergence).

use dynamap_core::Error as CoreError;

/// A CLI failure carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input files, unreadable paths, or unparseable values.
    Parse(String),
    /// A library-level error; the exit code depends on the variant.
    Core(CoreError),
}

impl CliError {
    /// The process exit code this failure maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Core(CoreError::Divergence { .. }) => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Parse(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        let line = e
            .position()
            .map(|p| format!(" (line {})", p.line()))
            .unwrap_or_default();
        CliError::Parse(format!("csv error{line}: {e}"))
    }
}

/// CLI-wide result alias.
pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_class() {
        assert_eq!(CliError::Parse("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::Data("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::Config("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::Domain("x".into())).exit_code(), 3);
        assert_eq!(
            CliError::Core(CoreError::Degenerate("x".into())).exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(CoreError::Divergence { iteration: 7 }).exit_code(),
            4
        );
    }
}
