use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};

use agilemap_core::AnalysisError;

/// Machine-readable error codes returned in the `code` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    UnknownObjective,
    UnknownPractice,
    NotFound,
    ExcludedPractice,
    NotSelected,
    AlreadySelected,
    NotAlternatives,
    SelectionIncomplete,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest | ErrorCode::UnknownObjective => StatusCode::BAD_REQUEST,
            ErrorCode::UnknownPractice | ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::ExcludedPractice
            | ErrorCode::NotSelected
            | ErrorCode::AlreadySelected
            | ErrorCode::NotAlternatives
            | ErrorCode::SelectionIncomplete => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Error body: `{"code", "message", "details"?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), details: None }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn status(&self) -> StatusCode {
        self.code.status()
    }

    pub fn unknown_practices(offenders: Vec<String>) -> Self {
        Self::new(ErrorCode::UnknownPractice, format!("unknown practice {}", offenders.join(", ")))
            .with_details(json!({ "practices": offenders }))
    }
}

impl From<AnalysisError> for ApiError {
    fn from(err: AnalysisError) -> Self {
        let message = err.to_string();
        match err {
            AnalysisError::UnknownPractice(ids) => {
                Self::unknown_practices(ids.iter().map(ToString::to_string).collect())
            }
            AnalysisError::ExcludedPractice(ids) => {
                Self::new(ErrorCode::ExcludedPractice, message).with_details(json!({ "practices": ids }))
            }
            AnalysisError::NotSelected(id) => {
                Self::new(ErrorCode::NotSelected, message).with_details(json!({ "practice": id }))
            }
            AnalysisError::AlreadySelected(id) => {
                Self::new(ErrorCode::AlreadySelected, message).with_details(json!({ "practice": id }))
            }
            AnalysisError::NotAlternatives { from, to, relation } => Self::new(ErrorCode::NotAlternatives, message)
                .with_details(json!({ "from": from, "to": to, "relation": relation })),
            AnalysisError::SelectionIncomplete(report) => Self::new(ErrorCode::SelectionIncomplete, message)
                .with_details(serde_json::to_value(*report).unwrap_or(Value::Null)),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}
