//! Per-feature likelihood-ratio tests on a multinomial logistic model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::qol::features::{FeatureMatrix, MinMaxScaler};

pub const METHOD: &str = "LR-multinomial-logit";
const RIDGE: f64 = 1e-8;
const MAX_ITER: usize = 100;
const UNSTABLE_COEF: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSignificance {
    pub feature: String,
    /// Likelihood-ratio statistic `2 (ll_full - ll_without)`.
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Set when either fit failed to converge or ran off to huge coefficients.
    pub unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub method: String,
    pub samples: usize,
    pub classes: usize,
    pub full_log_likelihood: f64,
    pub features: Vec<FeatureSignificance>,
    pub warnings: Vec<String>,
}

impl SignificanceReport {
    pub fn get(&self, feature: &str) -> Option<&FeatureSignificance> {
        self.features.iter().find(|f| f.feature == feature)
    }
}

#[derive(Debug, Clone)]
pub struct LogitFit {
    pub log_likelihood: f64,
    /// `(classes - 1) x (features + 1)`, intercept first in each row.
    pub coefficients: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl LogitFit {
    pub fn stable(&self) -> bool {
        self.converged && self.coefficients.iter().all(|b| b.abs() <= UNSTABLE_COEF)
    }
}

/// Maximum-likelihood multinomial logit with the first class as reference.
/// `labels` must be in `0..classes`.
pub fn fit_multinomial_logit(rows: &[Vec<f64>], labels: &[usize], classes: usize) -> LogitFit {
    let d = rows.first().map_or(0, |r| r.len()) + 1;
    let m = classes.saturating_sub(1);
    let np = m * d;
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();

    let mut beta = DVector::<f64>::zeros(np);
    let mut obj = penalized_ll(&design, labels, m, &beta);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let (grad, neg_hess) = derivatives(&design, labels, m, &beta);
        let rhs = grad - &beta * RIDGE;
        let lhs = neg_hess + DMatrix::identity(np, np) * RIDGE;
        let step = match lhs.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => match lhs.lu().solve(&rhs) {
                Some(s) => s,
                None => break,
            },
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &beta + &step * t;
            let cand_obj = penalized_ll(&design, labels, m, &cand);
            if cand_obj.is_finite() && cand_obj >= obj {
                let gain = cand_obj - obj;
                beta = cand;
                obj = cand_obj;
                accepted = true;
                if gain <= 1e-10 * (1.0 + obj.abs()) || step.amax() * t < 1e-9 {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no ascent direction left: at the optimum up to rounding
            converged = step.amax() < 1e-6;
            break;
        }
        if converged {
            break;
        }
    }
    LogitFit {
        log_likelihood: log_likelihood(&design, labels, m, &beta),
        coefficients: DMatrix::from_row_slice(m, d, beta.as_slice()),
        converged,
        iterations,
    }
}

fn linear(x: &[f64], m: usize, beta: &DVector<f64>, eta: &mut [f64]) {
    let d = x.len();
    for c in 0..m {
        eta[c] = x.iter().zip(&beta.as_slice()[c * d..(c + 1) * d]).map(|(a, b)| a * b).sum();
    }
}

/// Returns the log normalizer and fills `probs` for the non-reference classes.
fn class_probs(eta: &[f64], probs: &mut [f64]) -> f64 {
    let max = eta.iter().cloned().fold(0.0f64, f64::max);
    let mut z = (-max).exp();
    for e in eta {
        z += (e - max).exp();
    }
    for (p, e) in probs.iter_mut().zip(eta) {
        *p = (e - max).exp() / z;
    }
    max + z.ln()
}

fn log_likelihood(design: &[Vec<f64>], labels: &[usize], m: usize, beta: &DVector<f64>) -> f64 {
    let mut eta = vec![0.0; m];
    let mut probs = vec![0.0; m];
    let mut ll = 0.0;
    for (x, &y) in design.iter().zip(labels) {
        linear(x, m, beta, &mut eta);
        let lse = class_probs(&eta, &mut probs);
        ll += if y == 0 { 0.0 } else { eta[y - 1] } - lse;
    }
    ll
}

fn penalized_ll(design: &[Vec<f64>], labels: &[usize], m: usize, beta: &DVector<f64>) -> f64 {
    log_likelihood(design, labels, m, beta) - 0.5 * RIDGE * beta.norm_squared()
}

fn derivatives(
    design: &[Vec<f64>],
    labels: &[usize],
    m: usize,
    beta: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let d = design.first().map_or(1, |r| r.len());
    let np = m * d;
    let mut grad = DVector::zeros(np);
    let mut h = DMatrix::zeros(np, np);
    let mut eta = vec![0.0; m];
    let mut p = vec![0.0; m];
    for (x, &y) in design.iter().zip(labels) {
        linear(x, m, beta, &mut eta);
        class_probs(&eta, &mut p);
        for c in 0..m {
            let r = if y == c + 1 { 1.0 } else { 0.0 } - p[c];
            for j in 0..d {
                grad[c * d + j] += r * x[j];
            }
            for c2 in 0..m {
                let w = if c == c2 { p[c] * (1.0 - p[c]) } else { -p[c] * p[c2] };
                if w == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let wx = w * x[j];
                    let row = c * d + j;
                    for k in 0..d {
                        h[(row, c2 * d + k)] += wx * x[k];
                    }
                }
            }
        }
    }
    (grad, h)
}

/// One test per column: the full model against the model without it.
/// Columns are min-max scaled over all rows first.
pub fn feature_significance(x: &FeatureMatrix) -> Result<SignificanceReport> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("feature matrix is empty".into()));
    }
    let counts = x.class_counts();
    let present: Vec<usize> = (0..counts.len()).filter(|&k| counts[k] > 0).collect();
    if present.len() < 2 {
        return Err(Error::TooFewClasses(present.len()));
    }
    let scaled = MinMaxScaler::fit(x)?.transform(x)?;
    // compact label indices over observed classes
    let labels: Vec<usize> = x
        .label_indices()
        .iter()
        .map(|l| present.iter().position(|p| p == l).unwrap())
        .collect();
    let classes = present.len();
    let df = classes - 1;
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Computation(e.to_string()))?;

    let full = fit_multinomial_logit(&scaled.rows, &labels, classes);
    let mut warnings = Vec::new();
    if !full.stable() {
        warnings.push("full model fit is unstable (non-convergence or separation)".to_string());
    }

    let mut features = Vec::with_capacity(x.dim());
    for (j, name) in x.columns.iter().enumerate() {
        let col = scaled.column_values(j);
        if col.iter().all(|&v| v == col[0]) {
            features.push(FeatureSignificance {
                feature: name.clone(),
                statistic: 0.0,
                df,
                p_value: 1.0,
                unstable: false,
            });
            continue;
        }
        let reduced_rows: Vec<Vec<f64>> = scaled
            .rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| *v).collect())
            .collect();
        let reduced = fit_multinomial_logit(&reduced_rows, &labels, classes);
        let statistic = (2.0 * (full.log_likelihood - reduced.log_likelihood)).max(0.0);
        let p_value = chi.sf(statistic).clamp(0.0, 1.0);
        let unstable = !full.stable() || !reduced.stable();
        if unstable {
            warnings.push(format!("{name}: unstable fit, p-value is approximate"));
        }
        features.push(FeatureSignificance {
            feature: name.clone(),
            statistic,
            df,
            p_value,
            unstable,
        });
    }

    Ok(SignificanceReport {
        method: METHOD.to_string(),
        samples: x.len(),
        classes,
        full_log_likelihood: full.log_likelihood,
        features,
        warnings,
    })
}
