use std::path::PathBuf;

use ccilc::IlcError;
use serde_json::json;

pub const EXIT_DEVIATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Config {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ilc(#[from] IlcError),
    #[error("solver deviation {max:e} exceeds {tol:e}")]
    Deviation { max: f64, tol: f64 },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(
        path: impl Into<PathBuf>,
        line: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        CliError::Config {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } | CliError::Usage(_) => EXIT_CONFIG,
            CliError::Deviation { .. } => EXIT_DEVIATION,
            CliError::Ilc(e) => match e.root() {
                IlcError::Dimension { .. }
                | IlcError::AlgebraicLoop { .. }
                | IlcError::SizeCap { .. }
                | IlcError::Contour(_)
                | IlcError::Weights(_)
                | IlcError::IterationOutOfRange { .. }
                | IlcError::Invalid(_) => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Deviation { .. } => "deviation",
            CliError::Ilc(_) if self.exit_code() == EXIT_CONFIG => "config",
            CliError::Ilc(_) => "solver",
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json_line(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Config { path, line, .. } => {
                v["path"] = json!(path.display().to_string());
                if let Some(line) = line {
                    v["line"] = json!(line);
                }
            }
            CliError::Io { path, .. } => v["path"] = json!(path.display().to_string()),
            CliError::Ilc(IlcError::Iteration { j, .. }) => v["iteration"] = json!(j),
            _ => {}
        }
        v.to_string()
    }
}
