//! Minimal static asset serving for the bundled UI.

use crate::app::SharedApp;
use crate::error::ApiError;
use axum::extract::State;
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use std::path::{Component, Path, PathBuf};

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        _ => "application/octet-stream",
    }
}

/// Resolves a request path inside the UI directory, refusing traversal.
fn resolve(ui_dir: &Path, uri_path: &str) -> Option<PathBuf> {
    let trimmed = uri_path.trim_start_matches('/');
    let relative = if trimmed.is_empty() { "index.html" } else { trimmed };
    let relative = Path::new(relative);
    if relative
        .components()
        .any(|c| !matches!(c, Component::Normal(_)))
    {
        return None;
    }
    let full = ui_dir.join(relative);
    full.is_file().then_some(full)
}

pub async fn serve_ui(State(app): State<SharedApp>, uri: Uri) -> Response {
    let Some(ui_dir) = &app.ui_dir else {
        return ApiError::not_found().into_response();
    };
    let Some(path) = resolve(ui_dir, uri.path()) else {
        return ApiError::not_found().into_response();
    };
    match tokio::fs::read(&path).await {
        Ok(bytes) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, content_type(&path))],
            bytes,
        )
            .into_response(),
        Err(_) => ApiError::not_found().into_response(),
    }
}
