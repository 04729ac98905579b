//! Migration flows between neighborhoods and the relative (RQI) and perceived
//! (PQI) quality improvement of a relocation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::{mean_satisfaction, SatisfactionMatrix, SatisfactionSector, SurveyDataset, SurveyResponse};

/// Smallest |mean_to - mean_from| for which PQI is defined.
pub const PQI_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub from: String,
    pub to: String,
    pub count: u64,
    /// Max-min normalized over observed flows.
    pub normalized: f64,
}

/// Observed relocations. Only pairs with at least one move are present, and
/// moves within the same neighborhood are excluded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MigrationMatrix {
    /// Sorted by count descending, then (from, to).
    pub flows: Vec<Flow>,
}

impl MigrationMatrix {
    pub fn get(&self, from: &str, to: &str) -> Option<&Flow> {
        self.flows.iter().find(|f| f.from == from && f.to == to)
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }
}

pub fn migration_matrix(dataset: &SurveyDataset) -> MigrationMatrix {
    let mut counts: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for (from, to) in dataset.responses.iter().filter_map(SurveyResponse::relocation) {
        *counts.entry((from, to)).or_default() += 1;
    }
    let Some(max) = counts.values().copied().max() else {
        return MigrationMatrix::default();
    };
    let min = counts.values().copied().min().unwrap_or(max);
    let mut flows: Vec<Flow> = counts
        .into_iter()
        .map(|((from, to), count)| Flow {
            from: from.to_string(),
            to: to.to_string(),
            count,
            normalized: if max == min {
                1.0
            } else {
                (count - min) as f64 / (max - min) as f64
            },
        })
        .collect();
    // BTreeMap order already gives (from, to); stable sort keeps it for ties
    flows.sort_by_key(|f| std::cmp::Reverse(f.count));
    MigrationMatrix { flows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorRqi {
    pub sector: SatisfactionSector,
    pub mean_from: f64,
    pub mean_to: f64,
    pub rqi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RqiAssessment {
    pub from: String,
    pub to: String,
    pub per_sector: Vec<SectorRqi>,
    /// Mean of `per_sector`; `None` when no sector has support in both.
    pub overall: Option<f64>,
    /// Number of sectors included.
    pub k: usize,
    /// Sectors lacking support in either neighborhood.
    pub excluded: Vec<SatisfactionSector>,
}

impl RqiAssessment {
    pub fn sector(&self, sector: SatisfactionSector) -> Option<f64> {
        self.per_sector
            .iter()
            .find(|s| s.sector == sector)
            .map(|s| s.rqi)
    }
}

/// Relative change in neighborhood mean satisfaction for a move `from` ->
/// `to`, per sector and averaged over sectors rated in both neighborhoods.
pub fn rqi(
    sat: &SatisfactionMatrix,
    from: &str,
    to: &str,
    sectors: &[SatisfactionSector],
) -> RqiAssessment {
    let mut per_sector = Vec::new();
    let mut excluded = Vec::new();
    for &sector in sectors {
        match (sat.mean(sector, from), sat.mean(sector, to)) {
            (Some(mean_from), Some(mean_to)) if mean_from > 0.0 => per_sector.push(SectorRqi {
                sector,
                mean_from,
                mean_to,
                rqi: (mean_to - mean_from) / mean_from,
            }),
            _ => excluded.push(sector),
        }
    }
    let k = per_sector.len();
    let overall = (k > 0).then(|| per_sector.iter().map(|s| s.rqi).sum::<f64>() / k as f64);
    RqiAssessment {
        from: from.to_string(),
        to: to.to_string(),
        per_sector,
        overall,
        k,
        excluded,
    }
}

/// Why a PQI value could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PqiUndefined {
    /// Individual code missing or "I don't know".
    NoRating,
    /// No mean for the sector in the origin or destination.
    NoMean,
    /// Origin and destination means coincide.
    FlatMeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pqi {
    Value(f64),
    Undefined(PqiUndefined),
}

impl Pqi {
    pub fn value(self) -> Option<f64> {
        match self {
            Pqi::Value(v) => Some(v),
            Pqi::Undefined(_) => None,
        }
    }
}

/// `1 - (mean_to - individual) / (mean_to - mean_from)`.
pub fn pqi_value(mean_from: f64, mean_to: f64, individual: f64) -> Pqi {
    let denom = mean_to - mean_from;
    if denom.abs() < PQI_EPSILON {
        return Pqi::Undefined(PqiUndefined::FlatMeans);
    }
    Pqi::Value(1.0 - (mean_to - individual) / denom)
}

/// Perceived improvement of one relocated respondent for one sector.
pub fn pqi(sat: &SatisfactionMatrix, response: &SurveyResponse, sector: SatisfactionSector) -> Result<Pqi> {
    let (from, to) = response.relocation().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "respondent {:?} did not relocate",
            response.respondent_id
        ))
    })?;
    let Some(code) = response.satisfaction.rated(sector) else {
        return Ok(Pqi::Undefined(PqiUndefined::NoRating));
    };
    match (sat.mean(sector, from), sat.mean(sector, to)) {
        (Some(mean_from), Some(mean_to)) => Ok(pqi_value(mean_from, mean_to, f64::from(code))),
        _ => Ok(Pqi::Undefined(PqiUndefined::NoMean)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqiSummary {
    pub sector: SatisfactionSector,
    /// Arithmetic mean over defined values.
    pub mean: Option<f64>,
    pub count: usize,
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAssessment {
    pub from: String,
    pub to: String,
    pub flow: u64,
    pub normalized: f64,
    pub rqi: RqiAssessment,
    pub pqi: Vec<PqiSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSectorRqi {
    pub sector: SatisfactionSector,
    /// Mean per-sector RQI over relocation pairs where the sector is defined.
    pub mean_rqi: Option<f64>,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelocationReport {
    pub migration: MigrationMatrix,
    /// Ordered by flow descending.
    pub pairs: Vec<PairAssessment>,
    pub global: Vec<GlobalSectorRqi>,
    pub undefined_pqi: usize,
}

impl RelocationReport {
    pub fn pair(&self, from: &str, to: &str) -> Option<&PairAssessment> {
        self.pairs.iter().find(|p| p.from == from && p.to == to)
    }

    pub fn global_mean(&self, sector: SatisfactionSector) -> Option<f64> {
        self.global
            .iter()
            .find(|g| g.sector == sector)
            .and_then(|g| g.mean_rqi)
    }
}

pub fn relocation_report(dataset: &SurveyDataset) -> Result<RelocationReport> {
    let sat = mean_satisfaction(dataset);
    relocation_report_with(dataset, &sat)
}

pub fn relocation_report_with(dataset: &SurveyDataset, sat: &SatisfactionMatrix) -> Result<RelocationReport> {
    let migration = migration_matrix(dataset);
    let mut movers: BTreeMap<(&str, &str), Vec<&SurveyResponse>> = BTreeMap::new();
    for r in &dataset.responses {
        if let Some(pair) = r.relocation() {
            movers.entry(pair).or_default().push(r);
        }
    }

    let mut pairs = Vec::with_capacity(migration.flows.len());
    let mut undefined_pqi = 0;
    for flow in &migration.flows {
        let assessment = rqi(sat, &flow.from, &flow.to, &SatisfactionSector::ALL);
        let group = movers
            .get(&(flow.from.as_str(), flow.to.as_str()))
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        let mut summaries = Vec::with_capacity(SatisfactionSector::ALL.len());
        for sector in SatisfactionSector::ALL {
            let mut values = Vec::new();
            let mut undefined = 0;
            for r in group {
                match pqi(sat, r, sector)? {
                    Pqi::Value(v) => values.push(v),
                    Pqi::Undefined(_) => undefined += 1,
                }
            }
            undefined_pqi += undefined;
            summaries.push(PqiSummary {
                sector,
                mean: (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64),
                count: values.len(),
                undefined,
            });
        }
        pairs.push(PairAssessment {
            from: flow.from.clone(),
            to: flow.to.clone(),
            flow: flow.count,
            normalized: flow.normalized,
            rqi: assessment,
            pqi: summaries,
        });
    }

    let global = SatisfactionSector::ALL
        .iter()
        .map(|&sector| {
            let vals: Vec<f64> = pairs.iter().filter_map(|p| p.rqi.sector(sector)).collect();
            GlobalSectorRqi {
                sector,
                mean_rqi: (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64),
                pairs: vals.len(),
            }
        })
        .collect();

    Ok(RelocationReport {
        migration,
        pairs,
        global,
        undefined_pqi,
    })
}
