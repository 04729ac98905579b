//! Run configuration, audit headers and artifact emission for the CLI.

mod commands;
mod tables;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qol::{FeatureSet, PipelineConfig, Sampling};
use crate::survey::Axis;

pub use commands::execute;
pub use tables::CsvTable;

pub const TOOL: &str = "civic";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?} (expected json or csv)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    Ingest,
    Legitimacy {
        axis: Axis,
        scope: Option<String>,
        k: Option<usize>,
    },
    OptimalK {
        axis: Axis,
    },
    Relocation {
        from: Option<String>,
        to: Option<String>,
    },
    Train {
        features: FeatureSet,
        sampling: Sampling,
        pipeline: PipelineConfig,
    },
    Significance,
    ReportAll {
        pipeline: PipelineConfig,
    },
}

/// Everything needed to reproduce a run; embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub schema: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub command: Command,
}

impl RunConfig {
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("run config serializes");
        hex(&Sha256::digest(&bytes))
    }

    pub fn audit(&self) -> AuditHeader {
        AuditHeader {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            seed: self.seed,
            config_sha256: self.sha256(),
            config: self.clone(),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditHeader {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: RunConfig,
}

/// Machine-readable failure record printed on stderr by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub exit_code: i32,
    pub message: String,
}

impl ErrorRecord {
    pub fn from_error(e: &Error) -> Self {
        let kind = e.kind();
        ErrorRecord {
            kind: kind.as_str().to_string(),
            exit_code: exit_code(kind),
            message: e.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

pub fn exit_code(kind: crate::error::ErrorKind) -> i32 {
    match kind {
        crate::error::ErrorKind::Config => 2,
        crate::error::ErrorKind::Data => 3,
        crate::error::ErrorKind::Computation => 4,
    }
}

/// Write via a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    audit: &'a AuditHeader,
    artifact: &'a str,
    data: &'a T,
}

pub fn json_bytes<T: Serialize>(audit: &AuditHeader, artifact: &str, data: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Envelope {
        audit,
        artifact,
        data,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// CSV with a leading `# audit: {...}` comment line.
pub fn csv_bytes(audit: &AuditHeader, table: &CsvTable) -> Result<Vec<u8>> {
    let mut out = format!("# audit: {}\n", serde_json::to_string(audit)?).into_bytes();
    out.extend(table.to_bytes()?);
    Ok(out)
}

/// Split a CSV artifact into its audit header and the plain CSV body.
pub fn read_csv_artifact(text: &str) -> Result<(AuditHeader, &str)> {
    let (first, body) = text
        .split_once('\n')
        .ok_or_else(|| Error::InvalidArgument("empty artifact".into()))?;
    let json = first
        .strip_prefix("# audit: ")
        .ok_or_else(|| Error::InvalidArgument("artifact has no audit header".into()))?;
    Ok((serde_json::from_str(json)?, body))
}
