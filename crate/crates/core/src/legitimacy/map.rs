use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::legitimacy::curve::{legitimacy_curve, LegitimacyCurve};
use crate::legitimacy::knee::{decay_rate, optimal_k, KneeResult, SINGLE_ITEM_METHOD};
use crate::survey::{proposal_counts, Axis, CountTable, SurveyDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapItem {
    pub label: String,
    /// Legitimacy gained by funding this item, count / mean count.
    pub contribution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demand {
    Present,
    NoDemand,
}

/// The optimal-k portfolio of one scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegitimacyMap {
    pub axis: Axis,
    pub scope: String,
    pub demand: Demand,
    pub optimal_k: usize,
    /// Sorted by contribution, descending; length = optimal_k.
    pub items: Vec<MapItem>,
}

/// Counts, curve, knee and map for one scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeAnalysis {
    pub scope: String,
    pub counts: CountTable,
    pub curve: Option<LegitimacyCurve>,
    pub knee: Option<KneeResult>,
    pub map: LegitimacyMap,
}

impl ScopeAnalysis {
    /// True when the optimal portfolio is larger than what can be funded,
    /// i.e. the scope is a candidate for a participatory intervention.
    pub fn exceeds_budget(&self, affordable_k: usize) -> bool {
        self.map.demand == Demand::Present && self.map.optimal_k > affordable_k
    }
}

pub fn analyze_scope(dataset: &SurveyDataset, axis: Axis, scope: &str) -> Result<ScopeAnalysis> {
    let counts = proposal_counts(dataset, axis, scope)?;
    analyze_counts(counts)
}

pub fn analyze_counts(counts: CountTable) -> Result<ScopeAnalysis> {
    let axis = counts.axis;
    let scope = counts.scope.clone();
    if counts.total() == 0 {
        return Ok(ScopeAnalysis {
            map: LegitimacyMap {
                axis,
                scope: scope.clone(),
                demand: Demand::NoDemand,
                optimal_k: 0,
                items: Vec::new(),
            },
            scope,
            counts,
            curve: None,
            knee: None,
        });
    }
    let curve = legitimacy_curve(&counts)?;
    let knee = if curve.len() == 1 {
        KneeResult {
            optimal_k: 1,
            method: SINGLE_ITEM_METHOD.to_string(),
            decay_rate: decay_rate(&curve.gain, 1),
            distances: vec![0.0],
        }
    } else {
        optimal_k(&curve)?
    };
    let n = counts.len() as f64;
    let total = counts.total() as f64;
    let mut items: Vec<MapItem> = counts
        .entries()
        .iter()
        .take(knee.optimal_k)
        .map(|e| MapItem {
            label: e.label.clone(),
            contribution: e.count as f64 * n / total,
        })
        .collect();
    items.sort_by(|a, b| b.contribution.total_cmp(&a.contribution));
    Ok(ScopeAnalysis {
        map: LegitimacyMap {
            axis,
            scope: scope.clone(),
            demand: Demand::Present,
            optimal_k: knee.optimal_k,
            items,
        },
        scope,
        counts,
        curve: Some(curve),
        knee: Some(knee),
    })
}

/// Scope labels along an axis, in configured order.
pub fn axis_scopes(dataset: &SurveyDataset, axis: Axis) -> &[String] {
    match axis {
        Axis::SectorsWithinNeighborhood => &dataset.neighborhood_labels,
        Axis::NeighborhoodsWithinSector => &dataset.sector_labels,
    }
}

pub fn analyze_axis(dataset: &SurveyDataset, axis: Axis) -> Result<Vec<ScopeAnalysis>> {
    axis_scopes(dataset, axis)
        .iter()
        .map(|scope| analyze_scope(dataset, axis, scope))
        .collect()
}

/// Optimal-k portfolio for every scope on the axis. Scopes without any
/// proposals are kept with [`Demand::NoDemand`].
pub fn legitimacy_map(dataset: &SurveyDataset, axis: Axis) -> Result<Vec<LegitimacyMap>> {
    Ok(analyze_axis(dataset, axis)?
        .into_iter()
        .map(|a| a.map)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::{QolAnswer, SurveyResponse};

    fn ds(rows: &[(&str, &[&str])]) -> SurveyDataset {
        SurveyDataset {
            responses: rows
                .iter()
                .enumerate()
                .map(|(i, (nb, props))| SurveyResponse {
                    respondent_id: i.to_string(),
                    neighborhood: nb.to_string(),
                    previous_neighborhood: None,
                    qol: QolAnswer::Good,
                    satisfaction: Default::default(),
                    participation: Default::default(),
                    demographics: Default::default(),
                    proposals: props.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
            neighborhood_labels: vec!["A".into(), "B".into(), "C".into()],
            sector_labels: vec!["parks".into(), "parking".into(), "rivers".into(), "school".into()],
        }
    }

    #[test]
    fn single_sector_scope_has_length_one() {
        let d = ds(&[("A", &["parks"]), ("A", &["parks"])]);
        let maps = legitimacy_map(&d, Axis::SectorsWithinNeighborhood).unwrap();
        assert_eq!(maps[0].optimal_k, 1);
        assert_eq!(maps[0].items.len(), 1);
        assert_eq!(maps[0].items[0].label, "parks");
        assert_eq!(maps[0].items[0].contribution, 1.0);
    }

    #[test]
    fn empty_scopes_are_reported_not_dropped() {
        let d = ds(&[("A", &["parks"])]);
        let maps = legitimacy_map(&d, Axis::SectorsWithinNeighborhood).unwrap();
        assert_eq!(maps.len(), 3);
        assert_eq!(maps[1].demand, Demand::NoDemand);
        assert_eq!(maps[2].demand, Demand::NoDemand);
    }

    #[test]
    fn planted_peak_listed_first() {
        let mut rows: Vec<(&str, &[&str])> = vec![("B", &["rivers"]); 20];
        rows.extend([("B", &["parks"][..]), ("B", &["parking"]), ("B", &["school"])]);
        let d = ds(&rows);
        let maps = legitimacy_map(&d, Axis::SectorsWithinNeighborhood).unwrap();
        let b = &maps[1];
        assert_eq!(b.items[0].label, "rivers");
        assert_eq!(b.items.len(), b.optimal_k);
        // counts [20,1,1,1]: 20 / (23/4)
        assert!((b.items[0].contribution - 80.0 / 23.0).abs() < 1e-12);
    }

    #[test]
    fn neighborhood_axis_and_budget_flag() {
        let d = ds(&[
            ("A", &["parks", "parks"]),
            ("A", &["parks"]),
            ("B", &["parks"]),
            ("C", &["parks"]),
        ]);
        let a = analyze_scope(&d, Axis::NeighborhoodsWithinSector, "parks").unwrap();
        assert_eq!(a.counts.get("A"), Some(3));
        assert_eq!(a.map.items[0].label, "A");
        assert!(!a.exceeds_budget(a.map.optimal_k));
        assert!(a.exceeds_budget(a.map.optimal_k - 1));
    }
}
