use std::path::PathBuf;

use gipgut_server::{ServerConfig, StartupError};

fn config(dir: &std::path::Path) -> ServerConfig {
    ServerConfig { data_dir: dir.join("data"), bind_address: "127.0.0.1:0".parse().unwrap(), ..Default::default() }
}

#[test]
fn defaults_are_loopback() {
    let c = ServerConfig::default();
    assert_eq!(c.bind_address.to_string(), "127.0.0.1:8765");
    assert!(c.bind_address.ip().is_loopback());
}

#[test]
fn external_bind_needs_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.bind_address = "0.0.0.0:80".parse().unwrap();
    assert!(matches!(c.open_service(), Err(StartupError::ExternalBind(_))));
    c.allow_external = true;
    c.bind_address = "0.0.0.0:0".parse().unwrap();
    assert!(c.open_service().is_ok());
}

#[test]
fn missing_catalog_fails_startup() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.catalog_path = Some(PathBuf::from("/nonexistent/missing.json"));
    let err = c.open_service().err().unwrap();
    assert!(matches!(err, StartupError::Catalog(_)));
    assert!(err.to_string().contains("missing.json"));
}

#[tokio::test]
async fn port_in_use_is_a_bind_error() {
    let dir = tempfile::tempdir().unwrap();
    let (listener, _svc) = config(dir.path()).bind().await.unwrap();
    let mut again = config(dir.path());
    again.bind_address = listener.local_addr().unwrap();
    assert!(matches!(again.bind().await, Err(StartupError::Bind { .. })));
}
