//! Synthetic minority oversampling.
//!
//! Every class smaller than the largest one is grown to the largest class
//! size. A synthetic row is `x + u * (x' - x)` where `x` is a random member
//! of the class, `x'` one of its `k` nearest same-class neighbors (Euclidean),
//! and `u ~ U[0, 1)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qol::features::FeatureMatrix;
use crate::rng;
use crate::survey::QolClass;

/// Where a synthetic row came from (indices into the input matrix).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    /// Input rows first, synthetic rows appended in class order.
    pub matrix: FeatureMatrix,
    /// One entry per appended row.
    pub origins: Vec<SyntheticOrigin>,
}

pub fn smote_oversample(x: &FeatureMatrix, k_neighbors: usize, seed: u64) -> Result<FeatureMatrix> {
    Ok(smote_with_origins(x, k_neighbors, seed)?.matrix)
}

pub fn smote_with_origins(x: &FeatureMatrix, k_neighbors: usize, seed: u64) -> Result<SmoteOutput> {
    if k_neighbors == 0 {
        return Err(Error::InvalidArgument("k_neighbors must be >= 1".into()));
    }
    let counts = x.class_counts();
    let majority = counts.iter().copied().max().unwrap_or(0);
    for class in QolClass::ALL {
        let c = counts[class.index()];
        if c > 0 && c < majority && c < 2 {
            return Err(Error::ClassTooSmall {
                class: class.number(),
                count: c,
            });
        }
    }

    let mut rng = rng::substream(seed, rng::SMOTE);
    let mut out = x.clone();
    out.dropped = 0;
    let mut origins = Vec::new();
    for class in QolClass::ALL {
        let have = counts[class.index()];
        if have == 0 || have == majority {
            continue;
        }
        let members: Vec<usize> = (0..x.len()).filter(|&i| x.labels[i] == class).collect();
        let k = k_neighbors.min(members.len() - 1);
        let neighbors: Vec<Vec<usize>> = members
            .iter()
            .map(|&i| nearest(x, i, &members, k))
            .collect();
        for _ in 0..majority - have {
            let m = rng.random_range(0..members.len());
            let base = members[m];
            let neighbor = neighbors[m][rng.random_range(0..k)];
            let u: f64 = rng.random();
            let row = x.rows[base]
                .iter()
                .zip(&x.rows[neighbor])
                .map(|(a, b)| a + u * (b - a))
                .collect();
            out.rows.push(row);
            out.labels.push(class);
            origins.push(SyntheticOrigin { base, neighbor });
        }
    }
    Ok(SmoteOutput {
        matrix: out,
        origins,
    })
}

/// The `k` members closest to `i` (excluding `i`), ties by index.
fn nearest(x: &FeatureMatrix, i: usize, members: &[usize], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = members
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| (squared_distance(&x.rows[i], &x.rows[j]), j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
