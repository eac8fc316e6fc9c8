//! Single-port front door: REST routes for scheduling and corpus export,
//! the realtime upgrade endpoint for live sessions, and static UI assets.

pub mod actor;
pub mod app;
pub mod error;
pub mod rest;
pub mod rt;
pub mod static_files;

pub use app::{now_ms, App, GatewayConfig, SharedApp};
pub use error::ApiError;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use std::time::Duration;

/// Request bodies are small (forms, messages); cap them firmly.
pub const MAX_BODY_BYTES: usize = 64 * 1024;

pub fn router(app: SharedApp) -> Router {
    Router::new()
        .route("/healthz", get(rest::healthz))
        .route("/participants", post(rest::register))
        .route("/sessions", post(rest::create_session))
        .route("/slots", get(rest::list_slots))
        .route("/slots/{id}/book", post(rest::book_slot))
        .route("/notifications/due", get(rest::due_notifications))
        .route("/corpus/export", get(rest::corpus_export))
        .route("/rt", get(rt::rt_upgrade))
        .fallback(static_files::serve_ui)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(app)
}

/// Drives phase advancement, session ticks and the expired-transcript sweep.
pub fn start_ticker(app: SharedApp) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(Duration::from_secs(1));
        loop {
            interval.tick().await;
            let now = now_ms();
            if let Err(e) = app.service().advance_phase(now) {
                eprintln!("phase advance error: {e}");
            }
            actor::sweep_expired(&app);
            let handles: Vec<actor::SessionHandle> = app
                .sessions
                .lock()
                .expect("sessions lock")
                .values()
                .cloned()
                .collect();
            for handle in handles {
                let _ = handle.tx.try_send(actor::ActorMsg::Tick);
            }
            if let Err(e) = app.service().maybe_snapshot() {
                eprintln!("snapshot error: {e}");
            }
        }
    })
}

/// Binds the port and serves until shutdown.
pub async fn serve(config: GatewayConfig) -> std::io::Result<()> {
    let app = App::new(&config).map_err(|e| std::io::Error::other(e.message))?;
    let router = router(app.clone());
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    eprintln!("listening on port {}", config.port);
    let _ticker = start_ticker(app);
    axum::serve(listener, router).await
}
