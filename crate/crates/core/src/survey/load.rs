//! Delimited-text ingestion with per-row validation, and canonical export.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::model::{
    Demographics, ParticipationCodes, ParticipationItem, QolAnswer, SatisfactionCodes,
    SatisfactionSector, SurveyDataset, SurveyResponse, SATISFACTION_MAX,
};
use crate::survey::schema::{SchemaConfig, CANONICAL_COLUMNS};

pub const UNKNOWN_AS_MISSING_NOTE: &str =
    "satisfaction code 0 (\"I don't know\") is treated as missing, not as the bottom of the 1-5 scale";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedRow {
    pub row: usize,
    pub respondent_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub accepted: usize,
    pub rejected: Vec<RejectedRow>,
    /// Accepted rows that carry a warning (e.g. relocation within the same
    /// neighborhood).
    pub flagged: Vec<FlaggedRow>,
    pub notes: Vec<String>,
}

/// Read and validate a survey file.
pub fn load_survey(path: &Path, schema: &SchemaConfig) -> Result<(SurveyDataset, LoadReport)> {
    if !path.exists() {
        return Err(Error::DatasetNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_survey(&text, schema)
}

/// Validate survey text against a schema. Invalid rows are rejected one by
/// one and listed in the report.
pub fn parse_survey(text: &str, schema: &SchemaConfig) -> Result<(SurveyDataset, LoadReport)> {
    schema.validate()?;
    if text.trim().is_empty() {
        return Err(Error::NoDataRows);
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter_byte()?)
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader.headers()?.clone();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        index.entry(schema.canonical_name(h)).or_insert(i);
    }
    let mut columns = [0usize; CANONICAL_COLUMNS.len()];
    for (slot, name) in columns.iter_mut().zip(CANONICAL_COLUMNS) {
        *slot = *index
            .get(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let parser = RowParser {
        schema,
        neighborhoods: schema.neighborhoods.iter().map(String::as_str).collect(),
        sectors: schema.sectors.iter().map(String::as_str).collect(),
        columns,
        width: headers.len(),
    };

    let mut responses = Vec::new();
    let mut rejected = Vec::new();
    let mut flagged = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut rows = 0usize;

    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        rows += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rejected.push(RejectedRow {
                    row,
                    reason: format!("malformed row: {e}"),
                });
                continue;
            }
        };
        match parser.parse(&record) {
            Ok(resp) => {
                if !seen_ids.insert(resp.respondent_id.clone()) {
                    rejected.push(RejectedRow {
                        row,
                        reason: format!("duplicate respondent_id {:?}", resp.respondent_id),
                    });
                    continue;
                }
                if resp.previous_neighborhood.as_deref() == Some(resp.neighborhood.as_str()) {
                    flagged.push(FlaggedRow {
                        row,
                        respondent_id: resp.respondent_id.clone(),
                        reason: "self-relocation: previous neighborhood equals current".into(),
                    });
                }
                responses.push(resp);
            }
            Err(reason) => rejected.push(RejectedRow { row, reason }),
        }
    }
    if rows == 0 {
        return Err(Error::NoDataRows);
    }

    let report = LoadReport {
        accepted: responses.len(),
        rejected,
        flagged,
        notes: vec![UNKNOWN_AS_MISSING_NOTE.to_string()],
    };
    let dataset = SurveyDataset {
        responses,
        neighborhood_labels: schema.neighborhoods.clone(),
        sector_labels: schema.sectors.clone(),
    };
    Ok((dataset, report))
}

struct RowParser<'a> {
    schema: &'a SchemaConfig,
    neighborhoods: HashSet<&'a str>,
    sectors: HashSet<&'a str>,
    columns: [usize; CANONICAL_COLUMNS.len()],
    width: usize,
}

type RowResult<T> = std::result::Result<T, String>;

impl RowParser<'_> {
    fn field<'r>(&self, record: &'r csv::StringRecord, canonical: &str) -> &'r str {
        let pos = CANONICAL_COLUMNS
            .iter()
            .position(|c| *c == canonical)
            .expect("canonical column");
        record.get(self.columns[pos]).unwrap_or("").trim()
    }

    fn parse(&self, record: &csv::StringRecord) -> RowResult<SurveyResponse> {
        if record.len() != self.width {
            return Err(format!(
                "expected {} fields, got {}",
                self.width,
                record.len()
            ));
        }
        let respondent_id = self.field(record, "respondent_id");
        if respondent_id.is_empty() {
            return Err("respondent_id: empty".into());
        }
        let qol_raw = self.field(record, "q01");
        let qol: QolAnswer = qol_raw
            .parse()
            .map_err(|_| format!("q01: unknown quality-of-life answer {qol_raw:?}"))?;

        let mut satisfaction = SatisfactionCodes::default();
        for sector in SatisfactionSector::ALL {
            let col = sector.column();
            let code = parse_code(&col, self.field(record, &col), 0, SATISFACTION_MAX)?;
            satisfaction.set(sector, code);
        }
        let mut participation = ParticipationCodes::default();
        for item in ParticipationItem::ALL {
            let col = item.column();
            let code = parse_code(&col, self.field(record, &col), 0, item.max_code())?;
            participation.set(item, code);
        }

        let neighborhood = self.field(record, "q19");
        if neighborhood.is_empty() {
            return Err("q19: neighborhood is empty".into());
        }
        if !self.neighborhoods.contains(neighborhood) {
            return Err(format!("q19: unknown neighborhood label {neighborhood:?}"));
        }

        let moved = parse_yes_no(self.field(record, "q20"))?;
        let prev = self.field(record, "q21");
        let previous_neighborhood = match (moved, prev.is_empty()) {
            (Some(true), true) => {
                return Err("q20/q21: relocation reported without a previous neighborhood".into())
            }
            (Some(false), false) => {
                return Err("q20/q21: previous neighborhood given but q20 says no relocation".into())
            }
            (_, true) => None,
            (_, false) => {
                if !self.neighborhoods.contains(prev) {
                    return Err(format!("q21: unknown neighborhood label {prev:?}"));
                }
                Some(prev.to_string())
            }
        };

        let demographics = Demographics {
            household: parse_code("q23", self.field(record, "q23"), 1, 4)?,
            education: parse_code("q24", self.field(record, "q24"), 1, 4)?,
            employment: parse_code("q25", self.field(record, "q25"), 0, 3)?,
        };

        let mut proposals = Vec::new();
        for tag in self
            .field(record, "q26")
            .split(self.schema.proposal_separator.as_str())
            .map(str::trim)
            .filter(|t| !t.is_empty())
        {
            if !self.sectors.contains(tag) {
                return Err(format!("q26: unknown sector label {tag:?}"));
            }
            proposals.push(tag.to_string());
        }

        Ok(SurveyResponse {
            respondent_id: respondent_id.to_string(),
            neighborhood: neighborhood.to_string(),
            previous_neighborhood,
            qol,
            satisfaction,
            participation,
            demographics,
            proposals,
        })
    }
}

fn parse_code(column: &str, raw: &str, min: u8, max: u8) -> RowResult<Option<u8>> {
    if raw.is_empty() {
        return Ok(None);
    }
    let value: i64 = raw
        .parse()
        .map_err(|_| format!("{column}: not an integer code {raw:?}"))?;
    if value < i64::from(min) || value > i64::from(max) {
        return Err(format!(
            "{column}: code out of range {{{min}..{max}}} (got {value})"
        ));
    }
    Ok(Some(value as u8))
}

fn parse_yes_no(raw: &str) -> RowResult<Option<bool>> {
    match raw.to_ascii_lowercase().as_str() {
        "" => Ok(None),
        "yes" | "y" | "1" | "true" => Ok(Some(true)),
        "no" | "n" | "0" | "false" => Ok(Some(false)),
        _ => Err(format!("q20: expected yes/no, got {raw:?}")),
    }
}

/// Schema that reads back [`export_canonical`] output unchanged.
pub fn canonical_schema(dataset: &SurveyDataset) -> SchemaConfig {
    SchemaConfig::new(
        dataset.neighborhood_labels.clone(),
        dataset.sector_labels.clone(),
    )
}

/// Serialize a dataset to canonical comma-delimited text.
pub fn export_canonical(dataset: &SurveyDataset) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(CANONICAL_COLUMNS)?;
    let code = |c: Option<u8>| c.map(|v| v.to_string()).unwrap_or_default();
    for r in &dataset.responses {
        let mut row: Vec<String> = Vec::with_capacity(CANONICAL_COLUMNS.len());
        row.push(r.respondent_id.clone());
        row.push(r.qol.label().to_string());
        row.extend(SatisfactionSector::ALL.iter().map(|&s| code(r.satisfaction.get(s))));
        row.extend(ParticipationItem::ALL.iter().map(|&p| code(r.participation.get(p))));
        row.push(r.neighborhood.clone());
        row.push(if r.previous_neighborhood.is_some() { "yes" } else { "no" }.to_string());
        row.push(r.previous_neighborhood.clone().unwrap_or_default());
        row.push(code(r.demographics.household));
        row.push(code(r.demographics.education));
        row.push(code(r.demographics.employment));
        row.push(r.proposals.join(";"));
        writer.write_record(&row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Computation(format!("csv flush: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Computation(e.to_string()))
}
