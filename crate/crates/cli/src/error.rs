use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    /// A library error, with the time point that triggered it when known.
    #[error("{source}")]
    Core {
        t: Option<f64>,
        #[source]
        source: pointer_amp::Error,
    },

    /// Scenario ran but its regression gate did not pass.
    #[error("{0}")]
    Gate(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn core_at(t: f64, source: pointer_amp::Error) -> Self {
        CliError::Core { t: Some(t), source }
    }

    pub fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core { source, .. } if source.is_numeric() => "numeric",
            CliError::Core { .. } => "config",
            CliError::Gate(_) => "numeric",
            CliError::Io { .. } => "io",
        }
    }

    /// 2 config, 3 numeric, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "numeric" => 3,
            _ => 4,
        }
    }

    /// One-line `key=value` report for stderr. The message is quoted with
    /// Rust string escapes so the line never breaks.
    pub fn machine_line(&self) -> String {
        let mut line = format!("error kind={} exit={}", self.kind(), self.exit_code());
        if let CliError::Core { t: Some(t), .. } = self {
            line.push_str(&format!(" omega_m_t={t:e}"));
        }
        line.push_str(&format!(" message={:?}", self.to_string()));
        line
    }
}

impl From<pointer_amp::Error> for CliError {
    fn from(source: pointer_amp::Error) -> Self {
        CliError::Core { t: None, source }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pointer_amp::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(Error::InvalidParameter("k".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::ConvergenceFailed("n".into())).exit_code(), 3);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::io("a.csv", io).exit_code(), 4);
    }

    #[test]
    fn machine_line_is_single_line() {
        let e = CliError::core_at(1.5, Error::TruncationTooSmall("tail\nweight".into()));
        let line = e.machine_line();
        assert!(!line.contains('\n'));
        assert!(line.starts_with("error kind=numeric exit=3 omega_m_t=1.5e0 message="));
    }
}
