//! Versioned artifact headers and fleet persistence.
//!
//! Every artifact starts with a one-line JSON header
//! `{"format": "...", "version": N, ...}`. Line-delimited artifacts put it on
//! the first line; comma-separated ones prefix it with `#`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ingest::{parse_canonical_lines, CanonicalRecord};
use super::session::{Fleet, Provenance};
use crate::error::{Error, Result};

pub const SESSIONS_FORMAT: &str = "evprofile.sessions";
pub const SESSIONS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub meta: Map<String, Value>,
}

impl ArtifactHeader {
    pub fn new(format: &str, version: u32) -> Self {
        ArtifactHeader {
            format: format.to_string(),
            version,
            meta: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.meta.insert(
            key.to_string(),
            serde_json::to_value(value).expect("header metadata serializes"),
        );
        self
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("header serializes")
    }

    /// Parses a header line and checks format and version.
    pub fn parse_checked(
        path: &Path,
        line: &str,
        format: &'static str,
        version: u32,
    ) -> Result<ArtifactHeader> {
        let found = || line.chars().take(80).collect::<String>();
        let header: ArtifactHeader =
            serde_json::from_str(line).map_err(|_| Error::VersionMismatch {
                path: path.to_path_buf(),
                expected: format,
                expected_version: version,
                found: found(),
            })?;
        if header.format != format || header.version != version {
            return Err(Error::VersionMismatch {
                path: path.to_path_buf(),
                expected: format,
                expected_version: version,
                found: format!("{} version {}", header.format, header.version),
            });
        }
        Ok(header)
    }

    pub fn meta_str(&self, key: &str) -> Option<&str> {
        self.meta.get(key).and_then(Value::as_str)
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>> {
    open(path)?
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn sessions_header(fleet: &Fleet) -> ArtifactHeader {
    ArtifactHeader::new(SESSIONS_FORMAT, SESSIONS_VERSION)
        .with("provenance", fleet.provenance())
        .with("cutoff", fleet.cutoff())
}

/// Writes a fleet as a canonical session file.
pub fn persist_fleet(fleet: &Fleet, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", sessions_header(fleet).to_line()).map_err(io)?;
    for session in fleet.sessions() {
        let record = CanonicalRecord::from_session(session);
        writeln!(out, "{}", serde_json::to_string(&record)?).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Loads a fleet written by [`persist_fleet`]. Unlike
/// [`ingest_canonical`](super::ingest::ingest_canonical) this is strict: the
/// header is mandatory and any invalid record is an error.
pub fn load_fleet(path: &Path) -> Result<Fleet> {
    let lines = read_lines(path)?;
    let first = lines.first().ok_or_else(|| Error::VersionMismatch {
        path: path.to_path_buf(),
        expected: SESSIONS_FORMAT,
        expected_version: SESSIONS_VERSION,
        found: "empty file".into(),
    })?;
    let header = ArtifactHeader::parse_checked(path, first, SESSIONS_FORMAT, SESSIONS_VERSION)?;
    let (sessions, report) = parse_canonical_lines(lines.iter().skip(1).map(String::as_str), 2);
    if let Some(skip) = report.skipped.first() {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            line: skip.line,
            reason: skip.reason.as_str().to_string(),
        });
    }
    let (provenance, cutoff) = header_fleet_meta(&header);
    Ok(Fleet::new(provenance, cutoff, sessions))
}

pub(crate) fn header_fleet_meta(
    header: &ArtifactHeader,
) -> (Provenance, Option<chrono::DateTime<chrono::Utc>>) {
    let provenance = header
        .meta
        .get("provenance")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or(Provenance::Real);
    let cutoff = header
        .meta
        .get("cutoff")
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .flatten();
    (provenance, cutoff)
}
