//! Classification metrics: confusion matrix, one-vs-rest recall, precision
//! and accuracy per class, ROC curves and trapezoidal AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qol::features::FeatureMatrix;
use crate::qol::mlp::{argmax, TrainedModel};
use crate::survey::QolClass;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub label: String,
    pub support: usize,
    pub predicted: usize,
    pub recall: Option<f64>,
    /// `None` when the class was never predicted or has no support.
    pub precision: Option<f64>,
    /// One-vs-rest accuracy.
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub roc: Vec<RocPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    pub classes: Vec<ClassMetrics>,
    /// `confusion[true][predicted]`, class order 1..4.
    pub confusion: Vec<Vec<usize>>,
    pub overall_accuracy: f64,
    /// Macro average over classes with support.
    pub overall_recall: f64,
    /// Macro average over classes with support; undefined precision counts as 0.
    pub overall_precision: f64,
    pub macro_auc: Option<f64>,
    pub macro_roc: Vec<RocPoint>,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn class(&self, class: QolClass) -> &ClassMetrics {
        &self.classes[class.index()]
    }
}

pub fn evaluate(model: &TrainedModel, x: &FeatureMatrix) -> Result<EvalReport> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("test set is empty".into()));
    }
    let probs = x
        .rows
        .iter()
        .map(|r| model.params.predict_proba(r))
        .collect::<Result<Vec<_>>>()?;
    evaluate_probabilities(&probs, &x.label_indices())
}

/// Metrics from per-row class probabilities and true class indices.
pub fn evaluate_probabilities(probs: &[Vec<f64>], labels: &[usize]) -> Result<EvalReport> {
    let c = QolClass::COUNT;
    if probs.is_empty() {
        return Err(Error::InvalidArgument("no predictions to evaluate".into()));
    }
    if probs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: probs.len(),
        });
    }
    if let Some(p) = probs.iter().find(|p| p.len() != c) {
        return Err(Error::DimensionMismatch {
            expected: c,
            got: p.len(),
        });
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::InvalidArgument(format!("label index {l} out of range")));
    }

    let n = labels.len();
    let predicted: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
    let mut confusion = vec![vec![0usize; c]; c];
    for (&t, &p) in labels.iter().zip(&predicted) {
        confusion[t][p] += 1;
    }
    let correct: usize = (0..c).map(|k| confusion[k][k]).sum();

    let mut classes = Vec::with_capacity(c);
    let mut notes = Vec::new();
    for class in QolClass::ALL {
        let k = class.index();
        let support: usize = confusion[k].iter().sum();
        let pred_count: usize = (0..c).map(|t| confusion[t][k]).sum();
        let tp = confusion[k][k];
        let mut m = ClassMetrics {
            class: class.number(),
            label: class.label().to_string(),
            support,
            predicted: pred_count,
            recall: None,
            precision: None,
            accuracy: None,
            auc: None,
            roc: Vec::new(),
        };
        if support == 0 {
            notes.push(format!(
                "class {} has no test support; its metrics are undefined and excluded from macro averages",
                class.number()
            ));
        } else {
            m.recall = Some(tp as f64 / support as f64);
            m.precision = (pred_count > 0).then(|| tp as f64 / pred_count as f64);
            let fp = pred_count - tp;
            let fn_ = support - tp;
            m.accuracy = Some((n - fp - fn_) as f64 / n as f64);
            let scores: Vec<f64> = probs.iter().map(|p| p[k]).collect();
            let positive: Vec<bool> = labels.iter().map(|&l| l == k).collect();
            if support < n {
                let roc = roc_curve(&scores, &positive);
                m.auc = Some(auc(&roc));
                m.roc = roc;
            } else {
                notes.push(format!(
                    "class {} has no negatives in the test set; ROC undefined",
                    class.number()
                ));
            }
        }
        classes.push(m);
    }

    let supported: Vec<&ClassMetrics> = classes.iter().filter(|m| m.support > 0).collect();
    let overall_recall = mean(supported.iter().map(|m| m.recall.unwrap_or(0.0)));
    let overall_precision = mean(supported.iter().map(|m| m.precision.unwrap_or(0.0)));
    let curves: Vec<&[RocPoint]> = classes
        .iter()
        .filter(|m| m.auc.is_some())
        .map(|m| m.roc.as_slice())
        .collect();
    let macro_auc = (!curves.is_empty())
        .then(|| mean(classes.iter().filter_map(|m| m.auc)));
    let macro_roc = average_roc(&curves);

    Ok(EvalReport {
        samples: n,
        classes,
        confusion,
        overall_accuracy: correct as f64 / n as f64,
        overall_recall,
        overall_precision,
        macro_auc,
        macro_roc,
        notes,
    })
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// ROC points from a descending threshold sweep. Rows with equal scores
/// enter together, so the curve has one point per distinct score plus the
/// origin. Requires at least one positive and one negative.
pub fn roc_curve(scores: &[f64], positive: &[bool]) -> Vec<RocPoint> {
    let p = positive.iter().filter(|&&b| b).count() as f64;
    let q = positive.len() as f64 - p;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / q,
            tpr: tp as f64 / p,
        });
    }
    points
}

pub fn auc(roc: &[RocPoint]) -> f64 {
    roc.windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// Vertical average of several ROC curves over the union of their FPR values.
pub fn average_roc(curves: &[&[RocPoint]]) -> Vec<RocPoint> {
    if curves.is_empty() {
        return Vec::new();
    }
    let mut grid: Vec<f64> = curves.iter().flat_map(|c| c.iter().map(|p| p.fpr)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let k = curves.len() as f64;
    let mut out = Vec::with_capacity(2 * grid.len());
    for &x in &grid {
        let (mut lo, mut hi) = (0.0, 0.0);
        for c in curves {
            let (a, b) = interpolate(c, x);
            lo += a;
            hi += b;
        }
        out.push(RocPoint { fpr: x, tpr: lo / k });
        out.push(RocPoint { fpr: x, tpr: hi / k });
    }
    out.dedup();
    out
}

/// Lowest and highest TPR of `curve` at `fpr`; they differ on vertical steps.
fn interpolate(curve: &[RocPoint], fpr: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for w in curve.windows(2) {
        let (a, b) = (w[0], w[1]);
        if fpr < a.fpr || fpr > b.fpr {
            continue;
        }
        let t = if b.fpr == a.fpr {
            lo = lo.min(a.tpr);
            b.tpr
        } else {
            a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr)
        };
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 0.0)
    }
}
