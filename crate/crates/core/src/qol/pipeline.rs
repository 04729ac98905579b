//! End-to-end classifier runs: stratified split, scaling fitted on the
//! training side, optional oversampling of the training side, training and
//! held-out evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qol::features::{
    assemble_features, stratified_split, FeatureMatrix, FeatureSet, MinMaxScaler, UnknownPolicy,
};
use crate::qol::metrics::{evaluate, EvalReport};
use crate::qol::mlp::{train, MlpConfig, TrainedModel};
use crate::qol::smote::smote_oversample;
use crate::survey::{QolClass, SurveyDataset};

pub const PROTOCOL: &str = "stratified train/test split; min-max scaler fitted on the training split; oversampling applied to the training split only";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    None,
    Smote,
}

impl Sampling {
    pub const ALL: [Sampling; 2] = [Sampling::None, Sampling::Smote];

    pub fn label(self) -> &'static str {
        match self {
            Sampling::None => "none",
            Sampling::Smote => "smote",
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Sampling::None),
            "smote" => Ok(Sampling::Smote),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampling {other:?} (expected none or smote)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub test_fraction: f64,
    pub smote_neighbors: usize,
    pub unknown_policy: UnknownPolicy,
    pub mlp: MlpConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            test_fraction: 0.2,
            smote_neighbors: 5,
            unknown_policy: UnknownPolicy::default(),
            mlp: MlpConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.smote_neighbors == 0 {
            return Err(Error::InvalidArgument("smote_neighbors must be >= 1".into()));
        }
        self.mlp.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub feature_set: FeatureSet,
    pub sampling: Sampling,
    pub seed: u64,
    pub protocol: String,
    pub columns: Vec<String>,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub train_size: usize,
    pub train_size_sampled: usize,
    pub test_size: usize,
    pub train_class_counts: [usize; QolClass::COUNT],
    pub scaler: MinMaxScaler,
    pub model: TrainedModel,
    pub eval: EvalReport,
}

pub fn run_experiment(
    dataset: &SurveyDataset,
    set: FeatureSet,
    sampling: Sampling,
    config: &PipelineConfig,
    seed: u64,
) -> Result<ExperimentResult> {
    let x = assemble_features(dataset, set, config.unknown_policy);
    run_on_matrix(&x, sampling, config, seed)
}

pub fn run_on_matrix(
    x: &FeatureMatrix,
    sampling: Sampling,
    config: &PipelineConfig,
    seed: u64,
) -> Result<ExperimentResult> {
    if x.is_empty() {
        return Err(Error::NoDataRows);
    }
    let split = stratified_split(&x.labels, config.test_fraction, seed)?;
    if split.test.is_empty() {
        return Err(Error::InvalidArgument("test split is empty".into()));
    }
    let train_raw = x.subset(&split.train);
    let test_raw = x.subset(&split.test);
    let scaler = MinMaxScaler::fit(&train_raw)?;
    let train_scaled = scaler.transform(&train_raw)?;
    let test_scaled = scaler.transform(&test_raw)?;
    let train_set = match sampling {
        Sampling::None => train_scaled,
        Sampling::Smote => smote_oversample(&train_scaled, config.smote_neighbors, seed)?,
    };
    let mlp = MlpConfig {
        seed,
        ..config.mlp.clone()
    };
    let model = train(&train_set, &mlp)?;
    let eval = evaluate(&model, &test_scaled)?;
    Ok(ExperimentResult {
        feature_set: x.feature_set,
        sampling,
        seed,
        protocol: PROTOCOL.to_string(),
        columns: x.columns.clone(),
        rows_used: x.len(),
        rows_dropped: x.dropped,
        train_size: train_raw.len(),
        train_size_sampled: train_set.len(),
        test_size: test_raw.len(),
        train_class_counts: train_set.class_counts(),
        scaler,
        model,
        eval,
    })
}

/// One line of the results table: a class row or the overall row for a
/// (sampling, feature set) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsRow {
    pub sampling: Sampling,
    pub feature_set: String,
    pub class: String,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub accuracy: Option<f64>,
}

pub fn results_rows(results: &[ExperimentResult]) -> Vec<ResultsRow> {
    let mut rows = Vec::new();
    for r in results {
        for m in &r.eval.classes {
            rows.push(ResultsRow {
                sampling: r.sampling,
                feature_set: r.feature_set.label().to_string(),
                class: format!("{} ({})", m.class, m.label),
                recall: m.recall,
                precision: m.precision,
                accuracy: m.accuracy,
            });
        }
        rows.push(ResultsRow {
            sampling: r.sampling,
            feature_set: r.feature_set.label().to_string(),
            class: "overall".into(),
            recall: Some(r.eval.overall_recall),
            precision: Some(r.eval.overall_precision),
            accuracy: Some(r.eval.overall_accuracy),
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn fixture(n: usize) -> FeatureMatrix {
        let mut rng = crate::rng::substream(5, "pipe");
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let class = if i % 5 == 0 { QolClass::Enough } else { QolClass::Good };
            let centre = class.index() as f64;
            rows.push(vec![centre + rng.random_range(-0.3..0.3), rng.random_range(0.0..1.0)]);
            labels.push(class);
        }
        FeatureMatrix::new(FeatureSet::S, vec!["a".into(), "b".into()], rows, labels).unwrap()
    }

    fn quick() -> PipelineConfig {
        PipelineConfig {
            mlp: MlpConfig {
                epochs: 30,
                learning_rate: 1e-2,
                ..MlpConfig::default()
            },
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn oversampling_touches_training_side_only() {
        let x = fixture(100);
        let r = run_on_matrix(&x, Sampling::Smote, &quick(), 1).unwrap();
        assert_eq!(r.test_size, 20);
        assert_eq!(r.train_size, 80);
        assert_eq!(r.train_class_counts, [0, 64, 64, 0]);
        assert_eq!(r.eval.samples, 20);
        assert_eq!(r.eval.class(QolClass::Enough).support, 4);
    }

    #[test]
    fn runs_are_reproducible() {
        let x = fixture(60);
        let a = run_on_matrix(&x, Sampling::None, &quick(), 9).unwrap();
        let b = run_on_matrix(&x, Sampling::None, &quick(), 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(results_rows(&[a]).len(), 5);
    }

    #[test]
    fn sampling_parses() {
        assert_eq!("SMOTE".parse::<Sampling>().unwrap(), Sampling::Smote);
        assert!("up".parse::<Sampling>().is_err());
    }
}
