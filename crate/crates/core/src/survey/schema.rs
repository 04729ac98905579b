use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::model::SatisfactionSector;

/// Canonical column names, in export order. There is no q22.
pub const CANONICAL_COLUMNS: [&str; 26] = [
    "respondent_id",
    "q01",
    "q02",
    "q03",
    "q04",
    "q05",
    "q06",
    "q07",
    "q08",
    "q09",
    "q10",
    "q11",
    "q12",
    "q13",
    "q14",
    "q15",
    "q16",
    "q17",
    "q18",
    "q19",
    "q20",
    "q21",
    "q23",
    "q24",
    "q25",
    "q26",
];

fn default_delimiter() -> String {
    ",".to_string()
}

fn default_separator() -> String {
    ";".to_string()
}

/// Label sets and header mapping for one survey source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub neighborhoods: Vec<String>,
    /// Project-sector labels that proposal tags (q26) may use.
    pub sectors: Vec<String>,
    /// Source header -> canonical column name. Headers not listed are taken
    /// as already canonical.
    #[serde(default)]
    pub column_map: BTreeMap<String, String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default = "default_separator")]
    pub proposal_separator: String,
    /// Optional link from a project sector to the satisfaction item that
    /// measures it; used when joining proposal rankings with p-values.
    #[serde(default)]
    pub sector_satisfaction_map: BTreeMap<String, String>,
}

impl SchemaConfig {
    pub fn new(neighborhoods: Vec<String>, sectors: Vec<String>) -> Self {
        SchemaConfig {
            neighborhoods,
            sectors,
            column_map: BTreeMap::new(),
            delimiter: default_delimiter(),
            proposal_separator: default_separator(),
            sector_satisfaction_map: BTreeMap::new(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::SchemaNotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SchemaConfig =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn delimiter_byte(&self) -> Result<u8> {
        match self.delimiter.as_bytes() {
            [b] if b.is_ascii() && *b != b'"' => Ok(*b),
            _ => Err(Error::Schema(format!(
                "delimiter must be one ASCII character, got {:?}",
                self.delimiter
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unique("neighborhoods", &self.neighborhoods)?;
        check_unique("sectors", &self.sectors)?;
        self.delimiter_byte()?;
        if self.proposal_separator.is_empty() {
            return Err(Error::Schema("proposal_separator must not be empty".into()));
        }
        for s in &self.sectors {
            if s.contains(self.proposal_separator.as_str()) {
                return Err(Error::Schema(format!(
                    "sector label {s:?} contains the proposal separator {:?}",
                    self.proposal_separator
                )));
            }
        }
        let canonical: BTreeSet<&str> = CANONICAL_COLUMNS.iter().copied().collect();
        let mut targets = BTreeSet::new();
        for (src, dst) in &self.column_map {
            if !canonical.contains(dst.as_str()) {
                return Err(Error::Schema(format!(
                    "column_map maps {src:?} to unknown canonical column {dst:?}"
                )));
            }
            if !targets.insert(dst.as_str()) {
                return Err(Error::Schema(format!(
                    "column_map maps more than one source column to {dst:?}"
                )));
            }
        }
        for (sector, key) in &self.sector_satisfaction_map {
            if !self.sectors.contains(sector) {
                return Err(Error::Schema(format!(
                    "sector_satisfaction_map references unknown sector {sector:?}"
                )));
            }
            if SatisfactionSector::from_key(key).is_none() {
                return Err(Error::Schema(format!(
                    "sector_satisfaction_map references unknown satisfaction item {key:?}"
                )));
            }
        }
        Ok(())
    }

    /// Canonical name for a source header.
    pub fn canonical_name<'a>(&'a self, header: &'a str) -> &'a str {
        let h = header.trim();
        self.column_map.get(h).map(String::as_str).unwrap_or(h)
    }

    pub fn satisfaction_link(&self, sector: &str) -> Option<SatisfactionSector> {
        self.sector_satisfaction_map
            .get(sector)
            .and_then(|k| SatisfactionSector::from_key(k))
    }
}

fn check_unique(what: &str, labels: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if l.trim().is_empty() {
            return Err(Error::Schema(format!("{what} contains an empty label")));
        }
        if !seen.insert(l.as_str()) {
            return Err(Error::Schema(format!("{what} contains duplicate label {l:?}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = SchemaConfig::from_json(
            r#"{"neighborhoods":["A","B"],"sectors":["Parks"],"column_map":{"Quartier":"q19"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.delimiter, ",");
        assert_eq!(cfg.proposal_separator, ";");
        assert_eq!(cfg.canonical_name("Quartier"), "q19");
        assert_eq!(cfg.canonical_name(" q01 "), "q01");
    }

    #[test]
    fn rejects_duplicate_labels() {
        let err = SchemaConfig::from_json(r#"{"neighborhoods":["A","A"],"sectors":[]}"#);
        assert!(matches!(err, Err(Error::Schema(_))));
    }

    #[test]
    fn rejects_unknown_canonical_target() {
        let err = SchemaConfig::from_json(
            r#"{"neighborhoods":["A"],"sectors":[],"column_map":{"x":"q22"}}"#,
        );
        assert!(matches!(err, Err(Error::Schema(_))));
    }

    #[test]
    fn rejects_bad_satisfaction_link() {
        let err = SchemaConfig::from_json(
            r#"{"neighborhoods":["A"],"sectors":["Parks"],"sector_satisfaction_map":{"Parks":"parks"}}"#,
        );
        assert!(matches!(err, Err(Error::Schema(_))));
    }
}
