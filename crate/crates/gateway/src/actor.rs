//! One actor per live session: all events for a slot are processed in
//! arrival order by one task, which is the serialization point the realtime
//! protocol relies on.

use crate::app::{now_ms, SharedApp};
use crate::error::session_error_code;
use forge_domain::{ParticipantId, Role, SlotId};
use forge_session::{
    ClientFrame, FinalizeOutcome, LiveSession, Outgoing, ServerFrame, SessionError, SlotContext,
};
use std::collections::HashMap;
use tokio::sync::{mpsc, oneshot};

#[derive(Clone)]
pub struct SessionHandle {
    pub tx: mpsc::Sender<ActorMsg>,
}

pub enum ActorMsg {
    Join {
        participant_id: ParticipantId,
        conn: mpsc::Sender<ServerFrame>,
        reply: oneshot::Sender<Result<Role, SessionError>>,
    },
    Frame {
        from: Role,
        frame: ClientFrame,
    },
    Disconnect {
        role: Role,
    },
    Tick,
}

/// Returns the actor for a slot, spawning it on first use. Unbooked slots
/// stay inert: they get a placeholder proponent no auth code can match, so
/// the session can never activate.
pub fn get_or_spawn(app: &SharedApp, slot_id: &SlotId) -> Option<SessionHandle> {
    if let Some(handle) = app.sessions.lock().expect("sessions lock").get(slot_id) {
        return Some(handle.clone());
    }
    let context = {
        let service = app.service();
        let state = service.state();
        let slot = state.study.slots.get(slot_id)?;
        let session = state.study.sessions.get(&slot.session_id)?;
        let paper = state.study.papers.get(&session.paper_id)?;
        SlotContext {
            slot_id: slot_id.clone(),
            paper: paper.clone(),
            de_participant_id: session.de_participant_id.clone(),
            p_participant_id: slot
                .booked_p_participant_id
                .clone()
                .unwrap_or_else(|| ParticipantId::new("")),
            start_time: slot.start_time,
            duration_minutes: slot.duration_minutes,
        }
    };
    let transcript = app
        .service()
        .state()
        .transcripts
        .get(slot_id)
        .cloned()
        .unwrap_or_default();
    let live = LiveSession::with_transcript(context, app.rules, transcript);

    let (tx, rx) = mpsc::channel(64);
    let handle = SessionHandle { tx };
    app.sessions
        .lock()
        .expect("sessions lock")
        .insert(slot_id.clone(), handle.clone());
    tokio::spawn(run_actor(app.clone(), slot_id.clone(), live, rx));
    Some(handle)
}

async fn run_actor(
    app: SharedApp,
    slot_id: SlotId,
    mut live: LiveSession,
    mut rx: mpsc::Receiver<ActorMsg>,
) {
    let mut conns: HashMap<Role, mpsc::Sender<ServerFrame>> = HashMap::new();

    while let Some(msg) = rx.recv().await {
        let now = now_ms();
        match msg {
            ActorMsg::Join {
                participant_id,
                conn,
                reply,
            } => match live.join(&participant_id, now) {
                Ok((role, outputs)) => {
                    conns.insert(role, conn);
                    let _ = reply.send(Ok(role));
                    dispatch(&conns, outputs).await;
                }
                Err(e) => {
                    let _ = reply.send(Err(e));
                }
            },
            ActorMsg::Frame { from, frame } => match frame {
                ClientFrame::Msg { text, facts } => {
                    match live.post_message(from, &text, facts, now) {
                        Ok((message, outputs)) => {
                            if let Err(e) = app.service().record_message(&slot_id, message) {
                                eprintln!("store error for {slot_id}: {e}");
                            }
                            dispatch(&conns, outputs).await;
                            if let Some((_, hint)) = live.issue_hint(now) {
                                dispatch(&conns, vec![hint]).await;
                            }
                        }
                        Err(e) => {
                            send_error(&conns, from, &e).await;
                        }
                    }
                }
                ClientFrame::End => {
                    if live.signal_end(from) {
                        finalize(&app, &slot_id, &mut live, &conns).await;
                        break;
                    }
                }
                ClientFrame::Join { .. } => {
                    send_error(&conns, from, &SessionError::AlreadyJoined).await;
                }
            },
            ActorMsg::Disconnect { role } => {
                let outputs = live.leave(role, now);
                conns.remove(&role);
                dispatch(&conns, outputs).await;
            }
            ActorMsg::Tick => {
                live.check_timeouts(now);
                if !live.is_closed() && live.may_finalize(now) {
                    finalize(&app, &slot_id, &mut live, &conns).await;
                    break;
                }
            }
        }
        if live.is_closed() {
            break;
        }
    }
    app.sessions.lock().expect("sessions lock").remove(&slot_id);
}

async fn finalize(
    app: &SharedApp,
    slot_id: &SlotId,
    live: &mut LiveSession,
    conns: &HashMap<Role, mpsc::Sender<ServerFrame>>,
) {
    match live.finalize(now_ms()) {
        Ok((outcome, outputs)) => {
            let result = match outcome {
                FinalizeOutcome::Finalized(dialogue) => app.service().record_finalized(dialogue),
                FinalizeOutcome::Abandoned { reason } => {
                    app.service().record_abandoned(slot_id, &reason)
                }
            };
            if let Err(e) = result {
                eprintln!("store error for {slot_id}: {e}");
            }
            dispatch(conns, outputs).await;
        }
        Err(e) => {
            eprintln!("finalize error for {slot_id}: {e}");
        }
    }
    if let Err(e) = app.service().maybe_snapshot() {
        eprintln!("snapshot error: {e}");
    }
}

async fn dispatch(conns: &HashMap<Role, mpsc::Sender<ServerFrame>>, outputs: Vec<Outgoing>) {
    for output in outputs {
        match output {
            Outgoing::To(role, frame) => {
                if let Some(conn) = conns.get(&role) {
                    let _ = conn.send(frame).await;
                }
            }
            Outgoing::Both(frame) => {
                for conn in conns.values() {
                    let _ = conn.send(frame.clone()).await;
                }
            }
        }
    }
}

async fn send_error(
    conns: &HashMap<Role, mpsc::Sender<ServerFrame>>,
    to: Role,
    error: &SessionError,
) {
    if let Some(conn) = conns.get(&to) {
        let _ = conn
            .send(ServerFrame::Error {
                code: session_error_code(error).to_owned(),
                message: error.to_string(),
            })
            .await;
    }
}

/// Finalizes transcripts whose slot window has passed but that no live
/// actor owns (e.g. sessions interrupted by a restart). The standard corpus
/// filter applies.
pub fn sweep_expired(app: &SharedApp) {
    let now = now_ms();
    let stale: Vec<SlotId> = {
        let live_actors = app.sessions.lock().expect("sessions lock");
        let service = app.service();
        let state = service.state();
        state
            .transcripts
            .keys()
            .filter(|slot_id| !live_actors.contains_key(*slot_id))
            .filter(|slot_id| {
                state
                    .study
                    .slots
                    .get(*slot_id)
                    .map(|slot| now >= slot.interval().end)
                    .unwrap_or(false)
            })
            .cloned()
            .collect()
    };
    for slot_id in stale {
        let context = {
            let service = app.service();
            let state = service.state();
            let Some(slot) = state.study.slots.get(&slot_id) else {
                continue;
            };
            let Some(session) = state.study.sessions.get(&slot.session_id) else {
                continue;
            };
            let Some(paper) = state.study.papers.get(&session.paper_id) else {
                continue;
            };
            SlotContext {
                slot_id: slot_id.clone(),
                paper: paper.clone(),
                de_participant_id: session.de_participant_id.clone(),
                p_participant_id: slot
                    .booked_p_participant_id
                    .clone()
                    .unwrap_or_else(|| ParticipantId::new("")),
                start_time: slot.start_time,
                duration_minutes: slot.duration_minutes,
            }
        };
        let transcript = app
            .service()
            .state()
            .transcripts
            .get(&slot_id)
            .cloned()
            .unwrap_or_default();
        let mut live = LiveSession::with_transcript(context, app.rules, transcript);
        live.check_timeouts(now);
        if let Ok((outcome, _)) = live.finalize(now) {
            let result = match outcome {
                FinalizeOutcome::Finalized(dialogue) => app.service().record_finalized(dialogue),
                FinalizeOutcome::Abandoned { reason } => {
                    app.service().record_abandoned(&slot_id, &reason)
                }
            };
            if let Err(e) = result {
                eprintln!("store error sweeping {slot_id}: {e}");
            }
        }
    }
}
