//! JSON error responses.

use ahp_eval::criteria::CriteriaError;
use ahp_eval::error::AhpError;
use ahp_eval::sensitivity::SensitivityError;
use ahp_eval::storage::StorageError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            fields: Vec::new(),
            detail: None,
        }
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", what)
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    pub fn invalid(path: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        ApiError {
            fields: vec![FieldError {
                path: path.to_string(),
                message: message.clone(),
            }],
            ..Self::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", message)
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn with_detail(mut self, detail: impl Serialize) -> Self {
        self.detail = serde_json::to_value(detail).ok();
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

/// Maps criteria validation failures to a field path under `prefix`.
pub fn criteria_error(prefix: &str, ids: &[String], e: &CriteriaError) -> ApiError {
    // the last occurrence points at the offending entry for duplicates
    let at = |id: &str, field: &str| match ids.iter().rposition(|x| x == id) {
        Some(k) => format!("{prefix}[{k}].{field}"),
        None => prefix.to_string(),
    };
    let path = match e {
        CriteriaError::InvalidScore { criterion, .. } => at(criterion, "value"),
        CriteriaError::MissingEvidence(id) => at(id, "evidence"),
        CriteriaError::DuplicateScore(id) | CriteriaError::UnknownCriterion(id) => at(id, "criterion_id"),
        CriteriaError::MissingScore(_) => prefix.to_string(),
        CriteriaError::DuplicateId(id) | CriteriaError::InvalidId(id) => at(id, "id"),
        CriteriaError::EmptyAnchor { id, level } => at(id, &format!("anchors.{level}")),
        _ => prefix.to_string(),
    };
    ApiError::invalid(&path, e.to_string())
}

impl From<AhpError> for ApiError {
    fn from(e: AhpError) -> Self {
        let api = ApiError::invalid("judgments", e.to_string());
        match &e {
            AhpError::IncompleteMatrix { named, .. } => api.with_detail(serde_json::json!({ "missing": named })),
            _ => api,
        }
    }
}

impl From<StorageError> for ApiError {
    fn from(e: StorageError) -> Self {
        match e {
            StorageError::Ahp(a) => a.into(),
            StorageError::Criteria(c) => ApiError::invalid("", c.to_string()),
            StorageError::GateRejected { cor, threshold } => ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "consistency-gate",
                format!("CoR {cor:.4} exceeds {threshold:.2}; set allow_unverified to use these weights"),
            ),
            StorageError::Incomplete(m) => ApiError::conflict("incomplete", m),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<SensitivityError> for ApiError {
    fn from(e: SensitivityError) -> Self {
        let path = match e {
            SensitivityError::InvalidRange(_) => "range",
            SensitivityError::InvalidSteps => "steps",
            _ => "",
        };
        ApiError::invalid(path, e.to_string())
    }
}
