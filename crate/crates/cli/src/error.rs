//! Categorized command failures and their exit codes.

use std::fmt::Display;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Malformed input files.
    Input,
    /// Invalid or conflicting configuration.
    Config,
    /// A computation that could not produce a result.
    Compute,
    /// Filesystem failures.
    Io,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Input => "input",
            Category::Config => "config",
            Category::Compute => "compute",
            Category::Io => "io",
        }
    }

    /// Exit status; clap itself uses 2 for usage errors.
    pub fn exit_code(self) -> u8 {
        match self {
            Category::Input => 3,
            Category::Config => 4,
            Category::Compute => 5,
            Category::Io => 6,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Display) -> Self {
        Self {
            category,
            message: message.to_string(),
        }
    }

    pub fn config(message: impl Display) -> Self {
        Self::new(Category::Config, message)
    }
}

impl From<emoblog::Error> for CliError {
    fn from(e: emoblog::Error) -> Self {
        use emoblog::Error as E;
        let category = match &e {
            E::Parse { .. } | E::Csv(_) | E::InconsistentLog(_) | E::NonDenseId { .. } => Category::Input,
            E::UnknownAgent(_) | E::UnknownPost(_) | E::ExpiredPost { .. } => Category::Input,
            E::Config(_) | E::Distribution(_) => Category::Config,
            E::Empty(_) | E::TooLarge { .. } | E::ZeroStrength(_) | E::NoConvergence { .. } | E::FitRefused(_) => {
                Category::Compute
            }
            E::Io(_) => Category::Io,
        };
        Self::new(category, e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(Category::Io, e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
