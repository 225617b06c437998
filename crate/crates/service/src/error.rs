use oncograph_core::Error as CoreError;
use thiserror::Error;

pub type ServiceResult<T> = Result<T, ServiceError>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    NotFound(String),

    #[error("session `{0}` is busy with another command")]
    Conflict(String),

    #[error("{message}")]
    Validation {
        field: Option<String>,
        message: String,
    },

    #[error("{0}")]
    Unavailable(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ServiceError::Validation { field, .. } => field.as_deref(),
            _ => None,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ServiceError::Validation {
            field: Some(field.into()),
            message: message.into(),
        }
    }
}

impl From<CoreError> for ServiceError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Config { field, message } => ServiceError::Validation {
                field: Some(field),
                message,
            },
            CoreError::Parse { path, message, .. } => ServiceError::Validation {
                field: (!path.is_empty() && path != ".").then_some(path),
                message,
            },
            err @ CoreError::UndefinedProfile { .. } => ServiceError::Validation {
                field: None,
                message: err.to_string(),
            },
            other => ServiceError::Internal(other.to_string()),
        }
    }
}
