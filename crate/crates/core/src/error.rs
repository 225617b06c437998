use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range. `field` is a dotted path
    /// into the offending document (e.g. `switch.angiogenesis`).
    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    /// A document parsed but describes an inconsistent graph or state map.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("graph has no nodes to attach to")]
    EmptyGraph,

    #[error("profile undefined for a graph with {nodes} node(s); at least 3 are required")]
    UndefinedProfile { nodes: usize },

    #[error("repetition {index} failed: {source}")]
    Repetition {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Malformed structured text. `path` is the dotted location inside the
    /// document when known; `line`/`column` come from the parser.
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefix the field path of a configuration error, leaving other
    /// variants untouched.
    pub fn within(self, parent: &str) -> Self {
        match self {
            Error::Config { field, message } => Error::Config {
                field: format!("{parent}.{field}"),
                message,
            },
            other => other,
        }
    }

    /// True for errors caused by bad user input (usage/config class) as
    /// opposed to runtime failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Parse { .. } | Error::Integrity(_)
        )
    }
}

/// Deserialize a JSON document, reporting the field path of the first
/// failure.
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        Error::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}
