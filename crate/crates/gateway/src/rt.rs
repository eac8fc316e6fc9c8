//! The realtime upgrade endpoint: one websocket per participant per
//! session, frames forwarded to the owning session actor in arrival order.

use crate::actor::{get_or_spawn, ActorMsg};
use crate::app::SharedApp;
use crate::error::{session_error_code, ApiError};
use axum::extract::ws::{Message as WsMessage, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::http::HeaderMap;
use axum::response::Response;
use forge_domain::{ParticipantId, Role};
use forge_session::{ClientFrame, ServerFrame, SessionError};
use futures_util::{SinkExt, StreamExt};
use serde::Deserialize;
use tokio::sync::{mpsc, oneshot};

#[derive(Deserialize)]
pub struct RtQuery {
    /// Auth code fallback for clients that cannot set headers on upgrade.
    pub code: Option<String>,
}

pub async fn rt_upgrade(
    State(app): State<SharedApp>,
    headers: HeaderMap,
    Query(query): Query<RtQuery>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let token = headers
        .get(crate::rest::AUTH_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_owned)
        .or(query.code)
        .unwrap_or_default();
    let participant_id = app.authenticate(&token)?;
    Ok(ws.on_upgrade(move |socket| handle_socket(app, participant_id, socket)))
}

async fn handle_socket(app: SharedApp, participant_id: ParticipantId, socket: WebSocket) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::channel::<ServerFrame>(64);

    let writer = tokio::spawn(async move {
        while let Some(frame) = rx.recv().await {
            let text = serde_json::to_string(&frame).expect("frame serializes");
            if sink.send(WsMessage::Text(text.into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let mut joined: Option<(crate::actor::SessionHandle, Role)> = None;
    while let Some(incoming) = stream.next().await {
        let Ok(ws_message) = incoming else { break };
        let text = match ws_message {
            WsMessage::Text(text) => text.to_string(),
            WsMessage::Close(_) => break,
            _ => continue,
        };
        let frame: ClientFrame = match serde_json::from_str(&text) {
            Ok(frame) => frame,
            Err(e) => {
                let _ = tx
                    .send(ServerFrame::Error {
                        code: "BadFrame".into(),
                        message: e.to_string(),
                    })
                    .await;
                continue;
            }
        };
        match (&mut joined, frame) {
            (None, ClientFrame::Join { slot }) => {
                let Some(handle) = get_or_spawn(&app, &slot) else {
                    let _ = tx
                        .send(ServerFrame::Error {
                            code: "UnknownSlot".into(),
                            message: format!("no slot {slot}"),
                        })
                        .await;
                    continue;
                };
                let (reply_tx, reply_rx) = oneshot::channel();
                let sent = handle
                    .tx
                    .send(ActorMsg::Join {
                        participant_id: participant_id.clone(),
                        conn: tx.clone(),
                        reply: reply_tx,
                    })
                    .await;
                if sent.is_err() {
                    let _ = tx
                        .send(ServerFrame::Error {
                            code: "SlotWindowClosed".into(),
                            message: "session already closed".into(),
                        })
                        .await;
                    continue;
                }
                match reply_rx.await {
                    Ok(Ok(role)) => joined = Some((handle, role)),
                    Ok(Err(e)) => {
                        let _ = tx
                            .send(ServerFrame::Error {
                                code: session_error_code(&e).to_owned(),
                                message: e.to_string(),
                            })
                            .await;
                    }
                    Err(_) => break,
                }
            }
            (None, _) => {
                let _ = tx
                    .send(ServerFrame::Error {
                        code: session_error_code(&SessionError::SessionNotActive).to_owned(),
                        message: "join a slot first".into(),
                    })
                    .await;
            }
            (Some((handle, role)), frame) => {
                if handle
                    .tx
                    .send(ActorMsg::Frame { from: *role, frame })
                    .await
                    .is_err()
                {
                    let _ = tx
                        .send(ServerFrame::Closed {
                            reason: "session closed".into(),
                        })
                        .await;
                    break;
                }
            }
        }
    }
    if let Some((handle, role)) = joined {
        let _ = handle.tx.send(ActorMsg::Disconnect { role }).await;
    }
    drop(tx);
    let _ = writer.await;
}
