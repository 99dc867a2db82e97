//! Local HTTP server in front of [`gipgut_core::Service`].
//!
//! Emitters post one [`SessionReport`] per finished test session; the UI
//! and CLI query and edit the profile. All bodies are JSON and every error
//! body has the shape `{"error": "...", "field": "..."}`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gipgut_core::persistence::PersistError;
use gipgut_core::{Catalog, CatalogError, Clock, EngineError, ProfileEdit, Service, ServiceError, SessionReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

pub const DEFAULT_ADDR: &str = "127.0.0.1:8765";
pub const DEFAULT_PROFILE: &str = "tester";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub bind_address: SocketAddr,
    pub data_dir: PathBuf,
    /// `None` uses the bundled default catalog.
    pub catalog_path: Option<PathBuf>,
    pub clock: Clock,
    /// Profile id of a freshly created state.
    pub profile_id: String,
    /// Permit binding to a non-loopback address.
    pub allow_external: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind_address: DEFAULT_ADDR.parse().expect("valid default address"),
            data_dir: PathBuf::from("gipgut-data"),
            catalog_path: None,
            clock: Clock::System,
            profile_id: DEFAULT_PROFILE.into(),
            allow_external: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("refusing to bind non-loopback address {0} without --allow-external")]
    ExternalBind(SocketAddr),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("data dir {path}: {source}")]
    DataDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot load state: {0}")]
    State(#[from] PersistError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
}

impl ServerConfig {
    pub fn load_catalog(&self) -> Result<Catalog, CatalogError> {
        match &self.catalog_path {
            Some(path) => Catalog::load(path),
            None => Ok(Catalog::default_catalog()),
        }
    }

    /// Checks the bind policy, loads the catalog and opens the state.
    pub fn open_service(&self) -> Result<Service, StartupError> {
        if !self.bind_address.ip().is_loopback() && !self.allow_external {
            return Err(StartupError::ExternalBind(self.bind_address));
        }
        let catalog = self.load_catalog()?;
        std::fs::create_dir_all(&self.data_dir)
            .map_err(|source| StartupError::DataDir { path: self.data_dir.clone(), source })?;
        Ok(Service::open(&self.data_dir, catalog, self.clock, &self.profile_id)?)
    }

    /// Opens the service and binds the listener without serving yet.
    pub async fn bind(&self) -> Result<(TcpListener, Arc<Service>), StartupError> {
        let service = Arc::new(self.open_service()?);
        let listener = TcpListener::bind(self.bind_address)
            .await
            .map_err(|source| StartupError::Bind { addr: self.bind_address, source })?;
        Ok((listener, service))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>, field: Option<String>) -> Self {
        Self { status, body: ErrorBody { error: error.into(), field } }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ServiceError> for ApiError {
    fn from(err: ServiceError) -> Self {
        let message = err.to_string();
        match err {
            ServiceError::Report(e) => ApiError::new(StatusCode::BAD_REQUEST, message, Some(e.field)),
            ServiceError::Engine(EngineError::ProfileMismatch { .. }) => {
                ApiError::new(StatusCode::CONFLICT, message, Some("profile_id".into()))
            }
            ServiceError::Profile(e) => {
                let status = if e.field().is_some() { StatusCode::UNPROCESSABLE_ENTITY } else { StatusCode::INTERNAL_SERVER_ERROR };
                ApiError::new(status, message, e.field().map(str::to_owned))
            }
            ServiceError::NoDaily(_) => ApiError::new(StatusCode::NOT_FOUND, message, None),
            ServiceError::Engine(_) | ServiceError::Persist(_) => {
                tracing::error!(error = %message, "request failed");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, message, None)
            }
        }
    }
}

/// JSON body parsing that reports the offending field path.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = (path != ".").then_some(path);
        ApiError::new(StatusCode::BAD_REQUEST, format!("malformed body: {}", e.into_inner()), field)
    })
}

type Shared = State<Arc<Service>>;

async fn post_session(State(svc): Shared, body: Bytes) -> Result<Response, ApiError> {
    let report: SessionReport = parse_body(&body)?;
    Ok(Json(svc.ingest(report)?).into_response())
}

async fn get_profile(State(svc): Shared) -> Response {
    Json(svc.profile()).into_response()
}

async fn put_profile(State(svc): Shared, body: Bytes) -> Result<Response, ApiError> {
    let edit: ProfileEdit = parse_body(&body)?;
    Ok(Json(svc.edit_profile(&edit)?).into_response())
}

#[derive(Debug, Deserialize)]
struct AchievementsQuery {
    project_id: Option<String>,
}

async fn get_achievements(State(svc): Shared, Query(q): Query<AchievementsQuery>) -> Response {
    Json(svc.achievements(q.project_id.as_deref())).into_response()
}

async fn get_daily(State(svc): Shared) -> Result<Response, ApiError> {
    Ok(Json(svc.daily_task()?).into_response())
}

async fn get_unlockables(State(svc): Shared) -> Response {
    Json(svc.unlockables()).into_response()
}

/// The loaded catalog, so clients can render level thresholds and names.
async fn get_catalog(State(svc): Shared) -> Response {
    Json(svc.catalog()).into_response()
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such endpoint", None)
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/v1/sessions", axum::routing::post(post_session))
        .route("/api/v1/profile", get(get_profile).put(put_profile))
        .route("/api/v1/achievements", get(get_achievements))
        .route("/api/v1/daily-task", get(get_daily))
        .route("/api/v1/unlockables", get(get_unlockables))
        .route("/api/v1/catalog", get(get_catalog))
        .route("/healthz", get(|| async { ([(header::CONTENT_TYPE, "text/plain")], "ok") }))
        .fallback(not_found)
        .with_state(service)
}

/// Serves until `shutdown` resolves.
pub async fn run(
    listener: TcpListener,
    service: Arc<Service>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service)).with_graceful_shutdown(shutdown).await
}
