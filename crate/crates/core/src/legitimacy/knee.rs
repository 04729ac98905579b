//! Knee selection on a legitimacy curve.
//!
//! Both axes are min-max normalized to [0, 1]; the knee is the point farthest
//! from the chord joining the first and last points. Distances within
//! [`FLAT_TOLERANCE`] of each other count as tied and resolve to the smaller
//! k, so an exactly linear curve selects k = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legitimacy::curve::LegitimacyCurve;

pub const KNEE_METHOD: &str = "normalized-max-chord-distance";
pub const SINGLE_ITEM_METHOD: &str = "single-item";
pub const FLAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KneeResult {
    pub optimal_k: usize,
    pub method: String,
    /// Mean legitimacy gain over k > optimal_k (0 when optimal_k = n).
    pub decay_rate: f64,
    /// Normalized chord distance per k, for plotting.
    pub distances: Vec<f64>,
}

/// Normalized perpendicular distances from each point of `values` (indexed
/// 1..=n) to the endpoint chord.
pub fn chord_distances(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 2 {
        return Err(Error::CurveTooShort(n));
    }
    let first = values[0];
    let range = values[n - 1] - first;
    if range.abs() <= FLAT_TOLERANCE * first.abs().max(1.0) {
        return Ok(vec![0.0; n]);
    }
    let span = (n - 1) as f64;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = i as f64 / span;
            let y = (v - first) / range;
            (y - x).abs() / std::f64::consts::SQRT_2
        })
        .collect())
}

/// 1-based index of the knee of an arbitrary series.
pub fn knee_index(values: &[f64]) -> Result<usize> {
    Ok(argmax_first(&chord_distances(values)?))
}

fn argmax_first(distances: &[f64]) -> usize {
    let mut best_k = 1;
    let mut best = 0.0;
    for (i, &d) in distances.iter().enumerate() {
        // ties within tolerance stay with the smaller k
        if d > best + FLAT_TOLERANCE {
            best = d;
            best_k = i + 1;
        }
    }
    best_k
}

pub fn optimal_k(curve: &LegitimacyCurve) -> Result<KneeResult> {
    let distances = chord_distances(&curve.legitimacy)?;
    let optimal_k = argmax_first(&distances);
    Ok(KneeResult {
        optimal_k,
        method: KNEE_METHOD.to_string(),
        decay_rate: decay_rate(&curve.gain, optimal_k),
        distances,
    })
}

/// Mean gain strictly beyond `k`.
pub fn decay_rate(gain: &[f64], k: usize) -> f64 {
    let tail = &gain[k.min(gain.len())..];
    if tail.is_empty() {
        0.0
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}
