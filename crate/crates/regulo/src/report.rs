//! JSON envelope shared by certificates, profile reports, and audits.
//!
//! Reports are deterministic apart from the `generated_at_unix` stamp: the
//! same run configuration on the same inputs serializes to byte-identical
//! JSON once that one field is ignored.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

pub const KIND_CERTIFICATE: &str = "verification-certificate";
pub const KIND_K4_PROFILE: &str = "k4-exception-profile";
pub const KIND_AUDIT: &str = "analytic-audit";

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Envelope around a report body. `kind` and the stamp come first; the body
/// fields are flattened alongside them.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub kind: &'static str,
    pub generated_at_unix: u64,
    #[serde(flatten)]
    pub body: T,
}

pub fn envelope<T: Serialize>(kind: &'static str, body: T) -> Report<T> {
    let generated_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    Report {
        kind,
        generated_at_unix,
        body,
    }
}

pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    fs::write(path, to_json(report)?)?;
    Ok(())
}
