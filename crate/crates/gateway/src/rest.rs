//! REST handlers.

use crate::app::{now_ms, SharedApp};
use crate::error::ApiError;
use axum::extract::{Path, Query, State};
use axum::http::HeaderMap;
use axum::response::{IntoResponse, Response};
use axum::Json;
use forge_domain::{PaperId, ParticipantId, SlotId, Timestamp};
use forge_scheduler::{ManualSubmission, SignUpForm};
use forge_store::export_corpus;
use serde::{Deserialize, Serialize};

pub const AUTH_HEADER: &str = "x-auth-code";

fn authenticate(app: &SharedApp, headers: &HeaderMap) -> Result<ParticipantId, ApiError> {
    let token = headers
        .get(AUTH_HEADER)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("");
    app.authenticate(token)
}

pub async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({"ok": true}))
}

#[derive(Serialize)]
pub struct RegisteredView {
    pub participant_id: ParticipantId,
    /// Returned exactly once, at sign-up.
    pub auth_code: String,
    pub proposed_paper_ids: Vec<PaperId>,
}

pub async fn register(
    State(app): State<SharedApp>,
    Json(form): Json<SignUpForm>,
) -> Result<Json<RegisteredView>, ApiError> {
    let now = now_ms();
    let participant = {
        let mut service = app.service();
        app.with_rng(|rng| service.register_participant(now, &form, &ManualSubmission, rng))?
    };
    Ok(Json(RegisteredView {
        participant_id: participant.participant_id,
        auth_code: participant.auth_code,
        proposed_paper_ids: participant.proposed_paper_ids,
    }))
}

#[derive(Deserialize)]
pub struct CreateSessionBody {
    pub paper_id: PaperId,
    pub start_time: Timestamp,
}

pub async fn create_session(
    State(app): State<SharedApp>,
    headers: HeaderMap,
    Json(body): Json<CreateSessionBody>,
) -> Result<Response, ApiError> {
    let participant_id = authenticate(&app, &headers)?;
    let now = now_ms();
    let session = app
        .service()
        .create_de_session(now, &participant_id, &body.paper_id, body.start_time)?;
    Ok(Json(session).into_response())
}

#[derive(Serialize)]
pub struct SlotView {
    pub slot_id: SlotId,
    pub session_id: forge_domain::SessionId,
    pub paper_id: PaperId,
    pub paper_title: String,
    pub start_time: Timestamp,
    pub duration_minutes: u32,
    pub booked: bool,
    /// True when the caller is the slot's domain expert.
    pub yours_as_de: bool,
    /// True when the caller holds this booking.
    pub your_booking: bool,
}

#[derive(Serialize)]
pub struct SlotsView {
    pub phase: forge_scheduler::StudyPhase,
    pub slots: Vec<SlotView>,
}

#[derive(Deserialize)]
pub struct SlotsQuery {
    /// Accepted for interface stability; the listing always reflects the
    /// current phase.
    #[allow(dead_code)]
    pub phase: Option<String>,
    pub free: Option<bool>,
}

pub async fn list_slots(
    State(app): State<SharedApp>,
    headers: HeaderMap,
    Query(query): Query<SlotsQuery>,
) -> Result<Json<SlotsView>, ApiError> {
    let caller = authenticate(&app, &headers)?;
    let now = now_ms();
    app.service().advance_phase(now)?;
    let service = app.service();
    let state = service.state();
    let mut slots = Vec::new();
    for slot in state.study.slots.values() {
        if query.free == Some(true) && slot.booked_p_participant_id.is_some() {
            continue;
        }
        let session = &state.study.sessions[&slot.session_id];
        let paper = &state.study.papers[&session.paper_id];
        slots.push(SlotView {
            slot_id: slot.slot_id.clone(),
            session_id: slot.session_id.clone(),
            paper_id: paper.paper_id.clone(),
            paper_title: paper.title.clone(),
            start_time: slot.start_time,
            duration_minutes: slot.duration_minutes,
            booked: slot.booked_p_participant_id.is_some(),
            yours_as_de: session.de_participant_id == caller,
            your_booking: slot.booked_p_participant_id.as_ref() == Some(&caller),
        });
    }
    slots.sort_by(|a, b| (a.start_time, &a.slot_id).cmp(&(b.start_time, &b.slot_id)));
    Ok(Json(SlotsView {
        phase: state.study.phase,
        slots,
    }))
}

pub async fn book_slot(
    State(app): State<SharedApp>,
    headers: HeaderMap,
    Path(slot_id): Path<String>,
) -> Result<Response, ApiError> {
    let participant_id = authenticate(&app, &headers)?;
    let now = now_ms();
    let confirmation =
        app.service()
            .book_slot_as_p(now, &participant_id, &SlotId::new(slot_id))?;
    Ok(Json(confirmation).into_response())
}

#[derive(Deserialize)]
pub struct DueQuery {
    /// Drain cutoff in UTC milliseconds; defaults to the current time.
    pub now: Option<i64>,
}

pub async fn due_notifications(
    State(app): State<SharedApp>,
    headers: HeaderMap,
    Query(query): Query<DueQuery>,
) -> Result<Response, ApiError> {
    authenticate(&app, &headers)?;
    let now = query.now.map(Timestamp::from_millis).unwrap_or_else(now_ms);
    let due = app.service().due_notifications(now)?;
    Ok(Json(due).into_response())
}

pub async fn corpus_export(
    State(app): State<SharedApp>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    authenticate(&app, &headers)?;
    let bytes = export_corpus(&app.service().state().corpus);
    Ok((
        [(axum::http::header::CONTENT_TYPE, "application/json")],
        bytes,
    )
        .into_response())
}
