//! Demand tallies and neighborhood mean satisfaction.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::model::{SatisfactionSector, SurveyDataset};

/// Which way a demand tally is cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Fixed neighborhood; entries are project sectors.
    SectorsWithinNeighborhood,
    /// Fixed project sector; entries are neighborhoods.
    NeighborhoodsWithinSector,
}

impl Axis {
    pub fn short(self) -> &'static str {
        match self {
            Axis::SectorsWithinNeighborhood => "sectors",
            Axis::NeighborhoodsWithinSector => "neighborhoods",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountEntry {
    pub label: String,
    pub count: u64,
}

/// Demand counts along one axis, sorted by count descending with a
/// lexicographic tie-break on the label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub axis: Axis,
    pub scope: String,
    entries: Vec<CountEntry>,
}

impl CountTable {
    /// Build a table from arbitrary (label, count) pairs; the canonical order
    /// is imposed here.
    pub fn new(
        axis: Axis,
        scope: impl Into<String>,
        entries: impl IntoIterator<Item = (String, u64)>,
    ) -> Self {
        let mut entries: Vec<CountEntry> = entries
            .into_iter()
            .map(|(label, count)| CountEntry { label, count })
            .collect();
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
        CountTable {
            axis,
            scope: scope.into(),
            entries,
        }
    }

    /// Unlabeled table, for tests and ad hoc curves. Labels are `item{i}`.
    pub fn from_counts(counts: &[u64]) -> Self {
        CountTable::new(
            Axis::SectorsWithinNeighborhood,
            "",
            counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (format!("item{i:03}"), c)),
        )
    }

    pub fn entries(&self) -> &[CountEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Counts in table order, as reals.
    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.count as f64).collect()
    }

    pub fn get(&self, label: &str) -> Option<u64> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.count)
    }
}

/// Tally proposal tags for one scope. Labels that were never proposed in the
/// scope do not appear.
pub fn proposal_counts(dataset: &SurveyDataset, axis: Axis, scope: &str) -> Result<CountTable> {
    let mut tally: BTreeMap<&str, u64> = BTreeMap::new();
    match axis {
        Axis::SectorsWithinNeighborhood => {
            if !dataset.has_neighborhood(scope) {
                return Err(Error::UnknownLabel(format!("neighborhood {scope:?}")));
            }
            for r in dataset.responses.iter().filter(|r| r.neighborhood == scope) {
                for tag in &r.proposals {
                    *tally.entry(tag.as_str()).or_default() += 1;
                }
            }
        }
        Axis::NeighborhoodsWithinSector => {
            if !dataset.has_sector(scope) {
                return Err(Error::UnknownLabel(format!("sector {scope:?}")));
            }
            for r in &dataset.responses {
                let n = r.proposals.iter().filter(|t| *t == scope).count() as u64;
                if n > 0 {
                    *tally.entry(r.neighborhood.as_str()).or_default() += n;
                }
            }
        }
    }
    Ok(CountTable::new(
        axis,
        scope,
        tally.into_iter().map(|(l, c)| (l.to_string(), c)),
    ))
}

/// Total proposals per sector across the whole dataset, every configured
/// sector present (possibly with count 0).
pub fn sector_totals(dataset: &SurveyDataset) -> BTreeMap<String, u64> {
    let mut totals: BTreeMap<String, u64> =
        dataset.sector_labels.iter().map(|s| (s.clone(), 0)).collect();
    for r in &dataset.responses {
        for tag in &r.proposals {
            *totals.entry(tag.clone()).or_default() += 1;
        }
    }
    totals
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionCell {
    /// Mean on the 1..=5 code scale.
    pub mean: f64,
    pub support: u64,
}

/// Mean satisfaction per (sector, neighborhood). Cells without any rated
/// response are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionMatrix {
    cells: BTreeMap<SatisfactionSector, BTreeMap<String, SatisfactionCell>>,
}

impl SatisfactionMatrix {
    pub fn get(&self, sector: SatisfactionSector, neighborhood: &str) -> Option<SatisfactionCell> {
        self.cells.get(&sector)?.get(neighborhood).copied()
    }

    pub fn mean(&self, sector: SatisfactionSector, neighborhood: &str) -> Option<f64> {
        self.get(sector, neighborhood).map(|c| c.mean)
    }

    /// Cells in (sector, neighborhood) order.
    pub fn iter(&self) -> impl Iterator<Item = (SatisfactionSector, &str, SatisfactionCell)> {
        self.cells
            .iter()
            .flat_map(|(s, row)| row.iter().map(move |(n, c)| (*s, n.as_str(), *c)))
    }
}

pub fn mean_satisfaction(dataset: &SurveyDataset) -> SatisfactionMatrix {
    let mut sums: BTreeMap<(SatisfactionSector, &str), (u64, u64)> = BTreeMap::new();
    for r in &dataset.responses {
        for sector in SatisfactionSector::ALL {
            if let Some(code) = r.satisfaction.rated(sector) {
                let e = sums.entry((sector, r.neighborhood.as_str())).or_default();
                e.0 += u64::from(code);
                e.1 += 1;
            }
        }
    }
    let mut cells: BTreeMap<SatisfactionSector, BTreeMap<String, SatisfactionCell>> =
        BTreeMap::new();
    for ((sector, nb), (sum, support)) in sums {
        cells.entry(sector).or_default().insert(
            nb.to_string(),
            SatisfactionCell {
                mean: sum as f64 / support as f64,
                support,
            },
        );
    }
    SatisfactionMatrix { cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::model::{QolAnswer, SurveyResponse};

    fn resp(id: usize, nb: &str, props: &[&str], sat: Option<u8>) -> SurveyResponse {
        let mut r = SurveyResponse {
            respondent_id: id.to_string(),
            neighborhood: nb.into(),
            previous_neighborhood: None,
            qol: QolAnswer::Good,
            satisfaction: Default::default(),
            participation: Default::default(),
            demographics: Default::default(),
            proposals: props.iter().map(|s| s.to_string()).collect(),
        };
        r.satisfaction.set(SatisfactionSector::Security, sat);
        r
    }

    fn dataset(responses: Vec<SurveyResponse>) -> SurveyDataset {
        SurveyDataset {
            responses,
            neighborhood_labels: vec!["N".into(), "M".into()],
            sector_labels: vec!["parks".into(), "parking".into(), "rivers".into()],
        }
    }

    #[test]
    fn hand_tally() {
        let ds = dataset(vec![
            resp(1, "N", &["parks", "parking"], None),
            resp(2, "N", &["parks"], None),
            resp(3, "N", &["parks"], None),
            resp(4, "M", &["rivers"], None),
        ]);
        let t = proposal_counts(&ds, Axis::SectorsWithinNeighborhood, "N").unwrap();
        let got: Vec<_> = t.entries().iter().map(|e| (e.label.as_str(), e.count)).collect();
        assert_eq!(got, vec![("parks", 3), ("parking", 1)]);

        let t = proposal_counts(&ds, Axis::NeighborhoodsWithinSector, "parks").unwrap();
        assert_eq!(t.get("N"), Some(3));
        assert_eq!(t.get("M"), None);
    }

    #[test]
    fn zero_proposals_give_empty_table() {
        let ds = dataset(vec![resp(1, "N", &[], None)]);
        let t = proposal_counts(&ds, Axis::SectorsWithinNeighborhood, "M").unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn ties_break_lexicographically() {
        let ds = dataset(vec![
            resp(1, "N", &["rivers", "parks"], None),
            resp(2, "N", &["rivers", "parks"], None),
        ]);
        let t = proposal_counts(&ds, Axis::SectorsWithinNeighborhood, "N").unwrap();
        let labels: Vec<_> = t.entries().iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, vec!["parks", "rivers"]);
    }

    #[test]
    fn unknown_scope_is_an_error() {
        let ds = dataset(vec![]);
        assert!(proposal_counts(&ds, Axis::SectorsWithinNeighborhood, "Q").is_err());
        assert!(proposal_counts(&ds, Axis::NeighborhoodsWithinSector, "Q").is_err());
    }

    #[test]
    fn hand_average_excludes_unknown() {
        let ds = dataset(vec![
            resp(1, "N", &[], Some(4)),
            resp(2, "N", &[], Some(4)),
            resp(3, "N", &[], Some(0)),
            resp(4, "N", &[], Some(2)),
            resp(5, "M", &[], Some(0)),
        ]);
        let m = mean_satisfaction(&ds);
        let c = m.get(SatisfactionSector::Security, "N").unwrap();
        assert_eq!(c.support, 3);
        assert!((c.mean - 10.0 / 3.0).abs() < 1e-15);
        assert!(m.get(SatisfactionSector::Security, "M").is_none());
        assert!(m.get(SatisfactionSector::ShoppingFacilities, "N").is_none());
    }

    #[test]
    fn singleton_cell() {
        let ds = dataset(vec![resp(1, "M", &[], Some(5))]);
        let c = mean_satisfaction(&ds)
            .get(SatisfactionSector::Security, "M")
            .unwrap();
        assert_eq!((c.mean, c.support), (5.0, 1));
    }
}
