use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("runtime invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(qkelly_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Core(qkelly_core::Error::Invariant(_)) => EXIT_INVARIANT,
            _ => EXIT_USAGE,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<qkelly_core::Error> for CliError {
    fn from(e: qkelly_core::Error) -> Self {
        match e {
            qkelly_core::Error::Invariant(msg) => CliError::Invariant(msg),
            qkelly_core::Error::Config(items) => CliError::Config(items),
            other => CliError::Core(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io { path: "csv".to_string(), source: std::io::Error::other(e) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(qkelly_core::Error::Invariant("x".into())).exit_code(), EXIT_INVARIANT);
        assert_eq!(CliError::from(qkelly_core::Error::Config(vec!["x".into()])).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(qkelly_core::Error::UndefinedMu).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        let io = CliError::io("/nowhere", std::io::Error::other("denied"));
        assert_eq!(io.exit_code(), EXIT_USAGE);
        assert!(io.to_string().contains("/nowhere"));
    }

    #[test]
    fn config_errors_list_every_field() {
        let e = CliError::Config(vec!["game.p: missing".into(), "run.t_max must be positive".into()]);
        let text = e.to_string();
        assert!(text.contains("game.p") && text.contains("run.t_max"));
    }
}
