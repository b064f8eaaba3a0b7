//! HTTP session service for evaluations.
//!
//! Sessions walk the pipeline `defining-criteria → comparing →
//! weights-ready → scoring → complete`. Each session is a project file in
//! the data directory; every successful mutation bumps the revision and
//! rewrites the file before responding. Clients may send the revision they
//! last saw in `If-Match`; a mismatch is rejected with 409.

pub mod config;
pub mod error;
mod routes;
pub mod state;

use axum::extract::{Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;

pub use config::{ConfigError, ServiceConfig};
pub use error::ApiError;
pub use state::{AppState, ClientFactory, Clock};

async fn require_token(State(st): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &st.config().bearer_token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        if !ok {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token").into_response();
        }
    }
    next.run(req).await
}

pub fn router(state: AppState) -> Router {
    let sessions = Router::new()
        .route("/sessions", post(routes::create_session))
        .route("/sessions/{id}", get(routes::get_session))
        .route("/sessions/{id}/criteria", get(routes::get_criteria).put(routes::put_criteria))
        .route("/sessions/{id}/judgments", put(routes::put_judgment))
        .route("/sessions/{id}/weights", get(routes::get_weights).post(routes::post_weights))
        .route("/sessions/{id}/alternatives/{name}/scores", put(routes::put_scores))
        .route("/sessions/{id}/aggregate", post(routes::post_aggregate))
        .route("/sessions/{id}/sensitivity", post(routes::post_sensitivity))
        .route("/sessions/{id}/report", get(routes::get_report))
        .route("/sessions/{id}/chart", get(routes::get_chart))
        .route("/sessions/{id}/panel", post(routes::post_panel))
        .route("/sessions/{id}/panel/{job}", get(routes::get_panel))
        .route("/sessions/{id}/panel/{job}/accept", post(routes::accept_panel))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/health", get(routes::health))
        .merge(sessions)
        .with_state(state)
}

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(state.config().listen).await?;
    serve_with(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves on an already bound listener until `shutdown` completes.
pub async fn serve_with(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
