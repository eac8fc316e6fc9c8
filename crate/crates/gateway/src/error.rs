//! The closed error surface: every module error maps to exactly one code
//! and one HTTP status, serialized as `{"error":{"code","message"}}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use forge_scheduler::ScheduleError;
use forge_session::SessionError;
use forge_store::{ServiceError, StoreError};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    pub code: &'static str,
    pub message: String,
    #[serde(skip)]
    pub status: StatusCode,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            status,
        }
    }

    pub fn unauthorized() -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "invalid auth code")
    }

    pub fn not_found() -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such resource")
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(serde_json::json!({
            "error": { "code": self.code, "message": self.message }
        }));
        (self.status, body).into_response()
    }
}

impl From<ScheduleError> for ApiError {
    fn from(e: ScheduleError) -> Self {
        use StatusCode as S;
        let (status, code) = match &e {
            ScheduleError::PhaseClosed { .. } => (S::CONFLICT, "PhaseClosed"),
            ScheduleError::DuplicateEmail => (S::CONFLICT, "DuplicateEmail"),
            ScheduleError::NoPaperSelected => (S::BAD_REQUEST, "NoPaperSelected"),
            ScheduleError::InvalidPaperSelection(_) => (S::BAD_REQUEST, "InvalidPaperSelection"),
            ScheduleError::InvalidPaper(_) => (S::BAD_REQUEST, "InvalidPaper"),
            ScheduleError::PaperSourceFailed(_) => (S::BAD_GATEWAY, "PaperSourceFailed"),
            ScheduleError::UnknownParticipant => (S::NOT_FOUND, "UnknownParticipant"),
            ScheduleError::UnknownPaper => (S::NOT_FOUND, "UnknownPaper"),
            ScheduleError::UnknownSession => (S::NOT_FOUND, "UnknownSession"),
            ScheduleError::UnknownSlot => (S::NOT_FOUND, "UnknownSlot"),
            ScheduleError::NotOwner => (S::FORBIDDEN, "NotOwner"),
            ScheduleError::OverlapWithOwnSession => (S::CONFLICT, "OverlapWithOwnSession"),
            ScheduleError::NonDivisibleDuration { .. } => (S::BAD_REQUEST, "NonDivisibleDuration"),
            ScheduleError::SlotTaken => (S::CONFLICT, "SlotTaken"),
            ScheduleError::OwnPaper => (S::FORBIDDEN, "OwnPaper"),
            ScheduleError::QuotaExceeded => (S::CONFLICT, "QuotaExceeded"),
            ScheduleError::DuplicatePaper => (S::CONFLICT, "DuplicatePaper"),
            ScheduleError::TimeConflict => (S::CONFLICT, "TimeConflict"),
            ScheduleError::Config(_) => (S::INTERNAL_SERVER_ERROR, "Config"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        use StatusCode as S;
        let (status, code) = match &e {
            SessionError::NotYourSlot => (S::FORBIDDEN, "NotYourSlot"),
            SessionError::SlotWindowClosed => (S::GONE, "SlotWindowClosed"),
            SessionError::AlreadyJoined => (S::CONFLICT, "AlreadyJoined"),
            SessionError::SessionNotActive => (S::CONFLICT, "SessionNotActive"),
            SessionError::PastDeadline => (S::CONFLICT, "PastDeadline"),
            SessionError::InvalidMessage(_) => (S::BAD_REQUEST, "InvalidMessage"),
            SessionError::AlreadyClosed => (S::GONE, "AlreadyClosed"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::internal(e.to_string())
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Schedule(inner) => inner.into(),
            ServiceError::Store(inner) => inner.into(),
        }
    }
}

/// WS-side error code for a session error (same closed enumeration).
pub fn session_error_code(e: &SessionError) -> &'static str {
    match e {
        SessionError::NotYourSlot => "NotYourSlot",
        SessionError::SlotWindowClosed => "SlotWindowClosed",
        SessionError::AlreadyJoined => "AlreadyJoined",
        SessionError::SessionNotActive => "SessionNotActive",
        SessionError::PastDeadline => "PastDeadline",
        SessionError::InvalidMessage(_) => "InvalidMessage",
        SessionError::AlreadyClosed => "AlreadyClosed",
    }
}
