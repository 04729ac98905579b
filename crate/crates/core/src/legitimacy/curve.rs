use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::{Axis, CountTable};

/// Legitimacy of funding the `k` most demanded items: their summed demand
/// divided by the mean demand over all items.
pub fn legitimacy(counts: &CountTable, k: usize) -> Result<f64> {
    check_table(counts)?;
    legitimacy_of_weights(&counts.weights(), k)
}

/// Same as [`legitimacy`] over real-valued demands in any order.
pub fn legitimacy_of_weights(weights: &[f64], k: usize) -> Result<f64> {
    let sorted = sorted_weights(weights)?;
    let n = sorted.len();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let total: f64 = sorted.iter().sum();
    let top: f64 = sorted[..k].iter().sum();
    Ok(top * n as f64 / total)
}

fn check_table(counts: &CountTable) -> Result<()> {
    if counts.is_empty() || counts.total() == 0 {
        return Err(Error::EmptyCountTable(counts.scope.clone()));
    }
    Ok(())
}

fn sorted_weights(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument(
            "demand weights must be finite and nonnegative".into(),
        ));
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted.is_empty() || sorted.iter().sum::<f64>() <= 0.0 {
        return Err(Error::EmptyCountTable(String::new()));
    }
    Ok(sorted)
}

/// L(k), share(k) and gain(k) for every k in 1..=n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegitimacyCurve {
    pub axis: Axis,
    pub scope: String,
    /// Item labels in rank order; `labels[k-1]` is the k-th item funded.
    pub labels: Vec<String>,
    pub k_values: Vec<usize>,
    /// Raw legitimacy value, dimensionless, L(n) = n.
    pub legitimacy: Vec<f64>,
    /// Top-k demand as a fraction of total demand, equal to L(k) / n.
    pub share: Vec<f64>,
    /// L(k) - L(k-1), with gain(1) = L(1).
    pub gain: Vec<f64>,
}

impl LegitimacyCurve {
    pub fn len(&self) -> usize {
        self.k_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_values.is_empty()
    }

    /// Share as a percentage, the unit used in exports.
    pub fn share_pct(&self) -> Vec<f64> {
        self.share.iter().map(|s| s * 100.0).collect()
    }

    pub fn at(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.len() {
            return Err(Error::KOutOfRange { k, n: self.len() });
        }
        Ok(self.legitimacy[k - 1])
    }
}

pub fn legitimacy_curve(counts: &CountTable) -> Result<LegitimacyCurve> {
    check_table(counts)?;
    let mut curve = curve_from_weights(&counts.weights())?;
    curve.axis = counts.axis;
    curve.scope = counts.scope.clone();
    curve.labels = counts.entries().iter().map(|e| e.label.clone()).collect();
    Ok(curve)
}

/// Curve over unlabeled real-valued demands.
pub fn curve_from_weights(weights: &[f64]) -> Result<LegitimacyCurve> {
    let sorted = sorted_weights(weights)?;
    let n = sorted.len();
    let total: f64 = sorted.iter().sum();
    let mut legitimacy = Vec::with_capacity(n);
    let mut share = Vec::with_capacity(n);
    let mut gain = Vec::with_capacity(n);
    let mut top = 0.0;
    let mut prev = 0.0;
    for w in &sorted {
        top += w;
        let l = top * n as f64 / total;
        legitimacy.push(l);
        share.push(top / total);
        gain.push(l - prev);
        prev = l;
    }
    Ok(LegitimacyCurve {
        axis: Axis::SectorsWithinNeighborhood,
        scope: String::new(),
        labels: (0..n).map(|i| format!("item{i:03}")).collect(),
        k_values: (1..=n).collect(),
        legitimacy,
        share,
        gain,
    })
}
