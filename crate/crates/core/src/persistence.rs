//! Durable engine state: one canonical JSON document per profile, replaced
//! atomically by writing a sibling temp file and renaming it into place.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::model::Millis;
use crate::state::{EngineState, StateError, STATE_SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDocument {
    pub schema_version: u32,
    pub saved_at: Millis,
    pub state: EngineState,
}

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("state file I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unsupported version {0}")]
    UnsupportedVersion(u64),
    #[error(transparent)]
    Invalid(#[from] StateError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PersistError + '_ {
    move |source| PersistError::Io { path: path.to_owned(), source }
}

/// Result of [`load_state`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded {
    pub state: EngineState,
    /// Where an unparseable file was moved before starting fresh.
    pub corrupt_backup: Option<PathBuf>,
}

/// Filesystem operations used by [`save_state_with`]. Swappable so the
/// rename boundary can be fault-tested.
pub trait StateFs {
    /// Create or truncate `path`, write `bytes` and flush them to disk.
    fn write_synced(&self, path: &Path, bytes: &[u8]) -> io::Result<()>;
    fn rename(&self, from: &Path, to: &Path) -> io::Result<()>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StdFs;

impl StateFs for StdFs {
    fn write_synced(&self, path: &Path, bytes: &[u8]) -> io::Result<()> {
        let mut file = File::create(path)?;
        file.write_all(bytes)?;
        file.sync_all()
    }

    fn rename(&self, from: &Path, to: &Path) -> io::Result<()> {
        fs::rename(from, to)?;
        #[cfg(unix)]
        if let Some(dir) = to.parent().filter(|d| !d.as_os_str().is_empty()) {
            // persist the directory entry; not fatal if unsupported
            let _ = File::open(dir).and_then(|d| d.sync_all());
        }
        Ok(())
    }
}

pub fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

fn corrupt_backup_path(path: &Path, unix_seconds: i64) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{unix_seconds}.corrupt"));
    path.with_file_name(name)
}

/// Canonical bytes: pretty JSON with struct fields in declaration order and
/// every map sorted, followed by a newline. Equal documents give equal bytes.
pub fn to_canonical_bytes(doc: &StateDocument) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("state serializes");
    bytes.push(b'\n');
    bytes
}

pub fn now_millis() -> Millis {
    chrono::Utc::now().timestamp_millis()
}

/// Loads the state at `path`.
///
/// A missing file yields a fresh state. A file that does not parse is moved
/// to `<path>.<unix-seconds>.corrupt` and a fresh state is returned. A file
/// with an unknown schema version, or whose state breaks an invariant
/// against `catalog`, is an error and is left untouched.
pub fn load_state(path: &Path, catalog: &Catalog, profile_id: &str) -> Result<Loaded, PersistError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Ok(Loaded { state: EngineState::fresh(catalog, profile_id), corrupt_backup: None });
        }
        Err(e) => return Err(io_err(path)(e)),
    };

    let parsed = serde_json::from_slice::<serde_json::Value>(&bytes).ok().map(|value| {
        let version = value.get("schema_version").and_then(serde_json::Value::as_u64);
        (version, value)
    });
    if let Some((Some(version), _)) = &parsed {
        if *version != u64::from(STATE_SCHEMA_VERSION) {
            return Err(PersistError::UnsupportedVersion(*version));
        }
    }
    let doc = parsed.and_then(|(_, value)| serde_json::from_value::<StateDocument>(value).ok());

    match doc {
        Some(doc) => {
            doc.state.check_invariants(catalog)?;
            Ok(Loaded { state: doc.state, corrupt_backup: None })
        }
        None => {
            let backup = corrupt_backup_path(path, now_millis().div_euclid(1000));
            fs::rename(path, &backup).map_err(io_err(path))?;
            tracing::warn!(path = %path.display(), backup = %backup.display(), "corrupt state file, starting fresh");
            Ok(Loaded { state: EngineState::fresh(catalog, profile_id), corrupt_backup: Some(backup) })
        }
    }
}

/// Saves `state` with the current time as `saved_at`. When the file already
/// holds this exact state it is left as is, so `saved_at` records the last
/// change rather than the last call.
pub fn save_state(path: &Path, state: &EngineState) -> Result<(), PersistError> {
    if let Ok(bytes) = fs::read(path) {
        if let Ok(existing) = serde_json::from_slice::<StateDocument>(&bytes) {
            if existing.state == *state {
                return Ok(());
            }
        }
    }
    save_state_with(&StdFs, path, state, now_millis())
}

/// Writes the document to a temp sibling and renames it over `path`.
/// On any failure the previous file is left intact.
pub fn save_state_with(
    fs_ops: &dyn StateFs,
    path: &Path,
    state: &EngineState,
    saved_at: Millis,
) -> Result<(), PersistError> {
    let doc = StateDocument { schema_version: STATE_SCHEMA_VERSION, saved_at, state: state.clone() };
    let bytes = to_canonical_bytes(&doc);
    let tmp = temp_path(path);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let result = fs_ops
        .write_synced(&tmp, &bytes)
        .map_err(io_err(&tmp))
        .and_then(|()| fs_ops.rename(&tmp, path).map_err(io_err(path)));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Catalog {
        Catalog::default_catalog()
    }

    #[test]
    fn missing_file_gives_fresh_state() {
        let dir = tempfile::tempdir().unwrap();
        let loaded = load_state(&dir.path().join("state.json"), &catalog(), "tester").unwrap();
        assert_eq!((loaded.state.profile.level, loaded.state.profile.xp), (1, 0));
        assert!(loaded.corrupt_backup.is_none());
    }

    #[test]
    fn truncated_file_is_backed_up_and_reset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let mut s = EngineState::fresh(&catalog(), "tester");
        s.profile.username = "alice".into();
        save_state(&path, &s).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();

        let loaded = load_state(&path, &catalog(), "tester").unwrap();
        let backup = loaded.corrupt_backup.unwrap();
        assert!(backup.to_string_lossy().ends_with(".corrupt"));
        assert!(backup.file_name().unwrap().to_string_lossy().starts_with("state.json."));
        assert_eq!(fs::read(&backup).unwrap(), &bytes[..bytes.len() / 2]);
        assert!(!path.exists());
        assert_eq!(loaded.state.profile.username, "tester");
    }

    #[test]
    fn unknown_version_is_not_reset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        fs::write(&path, r#"{"schema_version": 9, "saved_at": 0, "state": {}}"#).unwrap();
        let err = load_state(&path, &catalog(), "tester").unwrap_err();
        assert_eq!(err.to_string(), "unsupported version 9");
        assert!(path.exists());
    }

    #[test]
    fn invariant_violation_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let mut s = EngineState::fresh(&catalog(), "tester");
        s.profile.xp = 5000;
        save_state(&path, &s).unwrap();
        assert!(matches!(load_state(&path, &catalog(), "tester"), Err(PersistError::Invalid(_))));
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let s = EngineState::fresh(&catalog(), "tester");
        save_state(&path, &s).unwrap();
        let first = fs::read(&path).unwrap();
        save_state(&path, &s).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());

        let other = dir.path().join("b.json");
        save_state_with(&StdFs, &path, &s, 42).unwrap();
        save_state_with(&StdFs, &other, &s, 42).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&other).unwrap());
    }

    struct FailRename;

    impl StateFs for FailRename {
        fn write_synced(&self, path: &Path, bytes: &[u8]) -> io::Result<()> {
            StdFs.write_synced(path, bytes)
        }
        fn rename(&self, _: &Path, _: &Path) -> io::Result<()> {
            Err(io::Error::other("injected"))
        }
    }

    #[test]
    fn failure_before_rename_keeps_original() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let old = EngineState::fresh(&catalog(), "tester");
        save_state(&path, &old).unwrap();
        let before = fs::read(&path).unwrap();

        let mut new = old.clone();
        new.profile.username = "bob".into();
        assert!(save_state_with(&FailRename, &path, &new, 1).is_err());
        assert_eq!(fs::read(&path).unwrap(), before);
        assert!(!temp_path(&path).exists());
        assert_eq!(load_state(&path, &catalog(), "tester").unwrap().state, old);
    }
}
