//! Where CLI commands are sent: a running server, or an in-process
//! [`Service`] over a data directory (`--offline`).
//!
//! Both return the exact response body bytes, so `--json` output is the
//! same either way.

use std::fmt;

use gipgut_core::{ProfileEdit, Service, ServiceError, SessionReport};
use gipgut_server::ErrorBody;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing catalog, unusable data dir. Exit 2.
    Config(String),
    /// Server unreachable. Exit 3.
    Connect(String),
    /// Request understood and refused. Exit 4.
    Rejected(String),
    /// Anything else. Exit 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Connect(_) => 3,
            CliError::Rejected(_) => 4,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Connect(m) | CliError::Rejected(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<ServiceError> for CliError {
    fn from(err: ServiceError) -> Self {
        match err {
            ServiceError::Report(_) | ServiceError::Profile(_) | ServiceError::NoDaily(_) => {
                CliError::Rejected(err.to_string())
            }
            ServiceError::Engine(gipgut_core::EngineError::ProfileMismatch { .. }) => CliError::Rejected(err.to_string()),
            ServiceError::Engine(_) | ServiceError::Persist(_) => CliError::Failed(err.to_string()),
        }
    }
}

pub struct Remote {
    base: String,
    agent: ureq::Agent,
}

impl Remote {
    pub fn new(addr: &str) -> Self {
        let addr = addr.trim_end_matches('/');
        let base = if addr.starts_with("http://") || addr.starts_with("https://") {
            addr.to_owned()
        } else {
            format!("http://{addr}")
        };
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Self { base, agent }
    }

    fn finish(&self, result: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Result<Vec<u8>, CliError> {
        let mut resp = result.map_err(|e| CliError::Connect(format!("cannot reach {}: {e}", self.base)))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_vec()
            .map_err(|e| CliError::Connect(format!("reading response from {}: {e}", self.base)))?;
        if (200..300).contains(&status) {
            return Ok(body);
        }
        let message = serde_json::from_slice::<ErrorBody>(&body)
            .map(|b| b.error)
            .unwrap_or_else(|_| String::from_utf8_lossy(&body).into_owned());
        if (400..500).contains(&status) {
            Err(CliError::Rejected(message))
        } else {
            Err(CliError::Failed(format!("server error {status}: {message}")))
        }
    }

    fn get(&self, path: &str) -> Result<Vec<u8>, CliError> {
        self.finish(self.agent.get(format!("{}{path}", self.base)).call())
    }

    fn send(&self, method: &str, path: &str, body: &[u8]) -> Result<Vec<u8>, CliError> {
        let url = format!("{}{path}", self.base);
        let req = match method {
            "PUT" => self.agent.put(url),
            _ => self.agent.post(url),
        };
        self.finish(req.header("content-type", "application/json").send(body))
    }
}

pub enum Backend {
    Remote(Remote),
    Local(Box<Service>),
}

fn body<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("response serializes")
}

/// Minimal percent-encoding for a query value.
fn encode_query(value: &str) -> String {
    value
        .bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

impl Backend {
    pub fn ingest(&self, report_json: &[u8]) -> Result<Vec<u8>, CliError> {
        match self {
            Backend::Remote(r) => r.send("POST", "/api/v1/sessions", report_json),
            Backend::Local(svc) => {
                let report: SessionReport = serde_json::from_slice(report_json)
                    .map_err(|e| CliError::Rejected(format!("malformed body: {e}")))?;
                Ok(body(&svc.ingest(report)?))
            }
        }
    }

    pub fn profile(&self) -> Result<Vec<u8>, CliError> {
        match self {
            Backend::Remote(r) => r.get("/api/v1/profile"),
            Backend::Local(svc) => Ok(body(&svc.profile())),
        }
    }

    pub fn edit_profile(&self, edit: &ProfileEdit) -> Result<Vec<u8>, CliError> {
        match self {
            Backend::Remote(r) => r.send("PUT", "/api/v1/profile", &body(edit)),
            Backend::Local(svc) => Ok(body(&svc.edit_profile(edit)?)),
        }
    }

    pub fn achievements(&self, project: Option<&str>) -> Result<Vec<u8>, CliError> {
        match self {
            Backend::Remote(r) => match project {
                Some(p) => r.get(&format!("/api/v1/achievements?project_id={}", encode_query(p))),
                None => r.get("/api/v1/achievements"),
            },
            Backend::Local(svc) => Ok(body(&svc.achievements(project))),
        }
    }

    pub fn daily(&self) -> Result<Vec<u8>, CliError> {
        match self {
            Backend::Remote(r) => r.get("/api/v1/daily-task"),
            Backend::Local(svc) => Ok(body(&svc.daily_task()?)),
        }
    }

    pub fn catalog(&self) -> Result<Vec<u8>, CliError> {
        match self {
            Backend::Remote(r) => r.get("/api/v1/catalog"),
            Backend::Local(svc) => Ok(body(svc.catalog())),
        }
    }
}
