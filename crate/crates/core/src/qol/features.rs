//! Feature assembly, min-max scaling and the stratified train/test split.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::survey::{ParticipationItem, QolClass, SatisfactionSector, SurveyDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    /// Satisfaction items q02..q12.
    S,
    /// Participation items q13..q18.
    P,
    /// Both, satisfaction first.
    SP,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::S, FeatureSet::P, FeatureSet::SP];

    pub fn label(self) -> &'static str {
        match self {
            FeatureSet::S => "S",
            FeatureSet::P => "P",
            FeatureSet::SP => "S+P",
        }
    }

    fn uses_satisfaction(self) -> bool {
        matches!(self, FeatureSet::S | FeatureSet::SP)
    }

    fn uses_participation(self) -> bool {
        matches!(self, FeatureSet::P | FeatureSet::SP)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S" => Ok(FeatureSet::S),
            "P" => Ok(FeatureSet::P),
            "SP" | "S+P" => Ok(FeatureSet::SP),
            _ => Err(Error::InvalidArgument(format!("unknown feature set {s:?}"))),
        }
    }
}

/// How satisfaction code 0 ("I don't know") enters the feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownPolicy {
    /// Treat as missing: the row is dropped.
    #[default]
    Drop,
    /// Keep the raw code 0 as a value.
    KeepZero,
}

/// Dense numeric features with their merged class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub feature_set: FeatureSet,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<QolClass>,
    /// Respondents dropped for a missing selected feature.
    pub dropped: usize,
}

impl FeatureMatrix {
    pub fn new(
        feature_set: FeatureSet,
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<QolClass>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                got: bad.len(),
            });
        }
        Ok(FeatureMatrix {
            feature_set,
            columns,
            rows,
            labels,
            dropped: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn class_counts(&self) -> [usize; QolClass::COUNT] {
        let mut counts = [0; QolClass::COUNT];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    pub fn classes_present(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.index()).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_set: self.feature_set,
            columns: self.columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dropped: 0,
        }
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

pub fn feature_columns(set: FeatureSet) -> Vec<String> {
    let mut cols = Vec::new();
    if set.uses_satisfaction() {
        cols.extend(SatisfactionSector::ALL.iter().map(|s| s.key().to_string()));
    }
    if set.uses_participation() {
        cols.extend(ParticipationItem::ALL.iter().map(|p| p.key().to_string()));
    }
    cols
}

/// Build the feature matrix; demographics are never used.
pub fn assemble_features(
    dataset: &SurveyDataset,
    set: FeatureSet,
    unknown: UnknownPolicy,
) -> FeatureMatrix {
    let columns = feature_columns(set);
    let mut rows = Vec::with_capacity(dataset.len());
    let mut labels = Vec::with_capacity(dataset.len());
    let mut dropped = 0;
    'resp: for r in &dataset.responses {
        let mut row = Vec::with_capacity(columns.len());
        if set.uses_satisfaction() {
            for s in SatisfactionSector::ALL {
                let code = match unknown {
                    UnknownPolicy::Drop => r.satisfaction.rated(s),
                    UnknownPolicy::KeepZero => r.satisfaction.get(s),
                };
                match code {
                    Some(c) => row.push(f64::from(c)),
                    None => {
                        dropped += 1;
                        continue 'resp;
                    }
                }
            }
        }
        if set.uses_participation() {
            for p in ParticipationItem::ALL {
                match r.participation.get(p) {
                    Some(c) => row.push(f64::from(c)),
                    None => {
                        dropped += 1;
                        continue 'resp;
                    }
                }
            }
        }
        rows.push(row);
        labels.push(r.qol_class());
    }
    FeatureMatrix {
        feature_set: set,
        columns,
        rows,
        labels,
        dropped,
    }
}

/// Per-column min-max scaling fitted on one matrix (the training split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &FeatureMatrix) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidArgument("cannot fit a scaler on no rows".into()));
        }
        let d = x.dim();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in &x.rows {
            for j in 0..d {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    /// Scale one row. Constant training columns map to 0. Values outside the
    /// training range are not clamped.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(v, (lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let rows = x
            .rows
            .iter()
            .map(|r| self.transform_row(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix {
            rows,
            ..x.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded stratified split: within each class, `round(test_fraction * n_c)`
/// rows go to the test side. Index lists are sorted.
pub fn stratified_split(labels: &[QolClass], test_fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must be in [0, 1), got {test_fraction}"
        )));
    }
    let mut rng = rng::substream(seed, rng::SPLIT);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in QolClass::ALL {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        let n_test = (test_fraction * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::{QolAnswer, SurveyResponse};

    fn response(id: usize, sat: Option<u8>, qol: QolAnswer) -> SurveyResponse {
        let mut r = SurveyResponse {
            respondent_id: id.to_string(),
            neighborhood: "A".into(),
            previous_neighborhood: None,
            qol,
            satisfaction: Default::default(),
            participation: Default::default(),
            demographics: Default::default(),
            proposals: vec![],
        };
        for s in SatisfactionSector::ALL {
            r.satisfaction.set(s, Some(3));
        }
        r.satisfaction.set(SatisfactionSector::Security, sat);
        for p in ParticipationItem::ALL {
            r.participation.set(p, Some(1));
        }
        r
    }

    #[test]
    fn assembles_seventeen_columns_and_drops_unknowns() {
        let ds = SurveyDataset {
            responses: vec![
                response(0, Some(4), QolAnswer::Bad),
                response(1, Some(0), QolAnswer::Good),
                response(2, None, QolAnswer::Good),
            ],
            neighborhood_labels: vec!["A".into()],
            sector_labels: vec![],
        };
        let x = assemble_features(&ds, FeatureSet::SP, UnknownPolicy::Drop);
        assert_eq!(x.dim(), 17);
        assert_eq!(x.len(), 1);
        assert_eq!(x.dropped, 2);
        assert_eq!(x.labels, vec![QolClass::Insufficient]);

        let x = assemble_features(&ds, FeatureSet::SP, UnknownPolicy::KeepZero);
        assert_eq!((x.len(), x.dropped), (2, 1));

        let p = assemble_features(&ds, FeatureSet::P, UnknownPolicy::Drop);
        assert_eq!((p.dim(), p.len()), (6, 3));
    }

    #[test]
    fn scaler_maps_training_columns_into_unit_interval() {
        let x = FeatureMatrix::new(
            FeatureSet::S,
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 7.0], vec![3.0, 7.0], vec![5.0, 7.0]],
            vec![QolClass::Good; 3],
        )
        .unwrap();
        let s = MinMaxScaler::fit(&x).unwrap();
        let t = s.transform(&x).unwrap();
        assert_eq!(t.column_values(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(t.column_values(1), vec![0.0, 0.0, 0.0]);
        assert_eq!(s.transform_row(&[9.0, 7.0]).unwrap(), vec![2.0, 0.0]);
        assert!(s.transform_row(&[1.0]).is_err());
    }

    #[test]
    fn split_is_stratified_and_seeded() {
        let mut labels = vec![QolClass::Good; 50];
        labels.extend(vec![QolClass::Enough; 10]);
        labels.extend(vec![QolClass::Insufficient; 3]);
        let a = stratified_split(&labels, 0.2, 1).unwrap();
        let b = stratified_split(&labels, 0.2, 1).unwrap();
        assert_eq!(a, b);
        let test_good = a.test.iter().filter(|&&i| labels[i] == QolClass::Good).count();
        let test_enough = a.test.iter().filter(|&&i| labels[i] == QolClass::Enough).count();
        let test_insuff = a.test.iter().filter(|&&i| labels[i] == QolClass::Insufficient).count();
        assert_eq!((test_good, test_enough, test_insuff), (10, 2, 1));
        assert_eq!(a.train.len() + a.test.len(), labels.len());
    }
}
