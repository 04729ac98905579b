//! Joins proposal ranking, presence in optimal-k portfolios and classifier
//! p-values into one row per project sector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::legitimacy::LegitimacyMap;
use crate::qol::significance::SignificanceReport;
use crate::survey::Axis;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckRow {
    pub sector: String,
    pub proposals: u64,
    /// 1 = most proposed; `None` if never proposed.
    pub ranking: Option<usize>,
    /// Share of all optimal-k contributions across neighborhoods that this
    /// sector accounts for, in percent.
    pub optimal_gain_pct: f64,
    pub satisfaction_item: Option<String>,
    pub p_value: Option<f64>,
}

/// `maps` are the per-neighborhood maps over sectors; maps on the other axis
/// are ignored. `links` maps a project sector to a feature column name.
pub fn optimal_gain_crosscheck(
    maps: &[LegitimacyMap],
    proposal_totals: &BTreeMap<String, u64>,
    sectors: &[String],
    links: &BTreeMap<String, String>,
    significance: Option<&SignificanceReport>,
) -> Vec<CrosscheckRow> {
    let mut contribution: BTreeMap<&str, f64> = BTreeMap::new();
    let mut total = 0.0;
    for map in maps.iter().filter(|m| m.axis == Axis::SectorsWithinNeighborhood) {
        for item in &map.items {
            *contribution.entry(item.label.as_str()).or_default() += item.contribution;
            total += item.contribution;
        }
    }

    let mut proposed: Vec<(&str, u64)> = sectors
        .iter()
        .map(|s| (s.as_str(), proposal_totals.get(s).copied().unwrap_or(0)))
        .filter(|(_, c)| *c > 0)
        .collect();
    proposed.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let rank: BTreeMap<&str, usize> = proposed.iter().enumerate().map(|(i, (s, _))| (*s, i + 1)).collect();

    let mut rows: Vec<CrosscheckRow> = sectors
        .iter()
        .map(|s| {
            let item = links.get(s).cloned();
            let p_value = item
                .as_deref()
                .and_then(|k| significance.and_then(|r| r.get(k)))
                .map(|f| f.p_value);
            let gain = contribution.get(s.as_str()).copied().unwrap_or(0.0);
            CrosscheckRow {
                sector: s.clone(),
                proposals: proposal_totals.get(s).copied().unwrap_or(0),
                ranking: rank.get(s.as_str()).copied(),
                optimal_gain_pct: if total > 0.0 { 100.0 * gain / total } else { 0.0 },
                satisfaction_item: item,
                p_value,
            }
        })
        .collect();
    rows.sort_by(|a, b| match (a.ranking, b.ranking) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.sector.cmp(&b.sector),
    });
    rows
}
