use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use crt_design::ops::SCHEMA_VERSION;
use crt_design::DesignError;
use serde_json::json;

/// A failed request. Every client error names the offending field; `$` is
/// the request as a whole.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub field: String,
    pub message: String,
}

impl ApiError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "validation",
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn too_large(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::PAYLOAD_TOO_LARGE,
            kind: "too_large",
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            kind: "internal",
            field: "$".into(),
            message: message.into(),
        }
    }
}

impl From<DesignError> for ApiError {
    fn from(e: DesignError) -> Self {
        let message = e.to_string();
        match e {
            DesignError::InvalidInput { field, .. } => ApiError::validation(field, message),
            DesignError::Unaffordable { .. } => ApiError::validation("budget", message),
            DesignError::Configuration(_) => ApiError::validation("min_clusters", message),
            DesignError::Degenerate(_) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                kind: "degenerate",
                field: "$".into(),
                message,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": {
                "status": self.status.as_u16(),
                "kind": self.kind,
                "field": self.field,
                "message": self.message,
            }
        });
        (self.status, Json(body)).into_response()
    }
}
