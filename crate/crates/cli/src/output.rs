use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Provenance stored beside every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub cli_version: String,
    pub core_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub rng: String,
    pub generated_at: String,
}

impl Metadata {
    pub fn new(command: &str, seed: Option<u64>) -> Metadata {
        Metadata {
            tool: "macstate".into(),
            cli_version: env!("CARGO_PKG_VERSION").into(),
            core_version: macstate::VERSION.into(),
            command: command.into(),
            seed,
            rng: macstate::sim::RNG_NAME.into(),
            generated_at: timestamp(),
        }
    }
}

/// RFC 3339 time of the run; `SOURCE_DATE_EPOCH` pins it for reproducible
/// artifacts.
pub fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse::<i64>().ok());
    let t = pinned.and_then(|s| DateTime::<Utc>::from_timestamp(s, 0)).unwrap_or_else(Utc::now);
    t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial artifact.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("cannot write {}", tmp.display()))?;
    f.write_all(contents)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// `out.csv` -> `out.json`.
pub fn json_sibling(path: &Path) -> PathBuf {
    path.with_extension("json")
}
