//! Fixed-layout CSV tables for every artifact.

use crate::error::{Error, Result};
use crate::legitimacy::{Demand, ScopeAnalysis};
use crate::qol::{CrosscheckRow, ExperimentResult, ResultsRow, SignificanceReport};
use crate::relocation::RelocationReport;
use crate::survey::{LoadReport, SatisfactionMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Computation(e.to_string()))
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn ingest_rejected(report: &LoadReport) -> CsvTable {
    let mut t = CsvTable::new(&["row", "status", "reason"]);
    for r in &report.rejected {
        t.push(vec![r.row.to_string(), "rejected".into(), r.reason.clone()]);
    }
    for f in &report.flagged {
        t.push(vec![f.row.to_string(), "flagged".into(), f.reason.clone()]);
    }
    t
}

pub fn legitimacy_curves(analyses: &[ScopeAnalysis], only_k: Option<usize>) -> CsvTable {
    let mut t = CsvTable::new(&["scope", "k", "item", "legitimacy", "share_pct", "gain"]);
    for a in analyses {
        let Some(c) = &a.curve else { continue };
        let pct = c.share_pct();
        for i in 0..c.k_values.len() {
            if only_k.is_some_and(|k| k != c.k_values[i]) {
                continue;
            }
            t.push(vec![
                a.scope.clone(),
                c.k_values[i].to_string(),
                c.labels[i].clone(),
                num(c.legitimacy[i]),
                num(pct[i]),
                num(c.gain[i]),
            ]);
        }
    }
    t
}

pub fn optimal_k(analyses: &[ScopeAnalysis]) -> CsvTable {
    let mut t = CsvTable::new(&["scope", "demand", "items", "optimal_k", "decay_rate", "method", "portfolio"]);
    for a in analyses {
        let (k, decay, method) = match &a.knee {
            Some(kn) => (kn.optimal_k.to_string(), num(kn.decay_rate), kn.method.clone()),
            None => (a.map.optimal_k.to_string(), String::new(), String::new()),
        };
        t.push(vec![
            a.scope.clone(),
            match a.map.demand {
                Demand::Present => "present".into(),
                Demand::NoDemand => "no_demand".into(),
            },
            a.counts.len().to_string(),
            k,
            decay,
            method,
            a.map.items.iter().map(|i| i.label.as_str()).collect::<Vec<_>>().join(";"),
        ]);
    }
    t
}

pub fn legitimacy_map(analyses: &[ScopeAnalysis]) -> CsvTable {
    let mut t = CsvTable::new(&["scope", "rank", "item", "contribution"]);
    for a in analyses {
        for (i, item) in a.map.items.iter().enumerate() {
            t.push(vec![a.scope.clone(), (i + 1).to_string(), item.label.clone(), num(item.contribution)]);
        }
    }
    t
}

pub fn satisfaction(sat: &SatisfactionMatrix) -> CsvTable {
    let mut t = CsvTable::new(&["sector", "neighborhood", "mean", "support"]);
    for (s, n, cell) in sat.iter() {
        t.push(vec![s.key().into(), n.to_string(), num(cell.mean), cell.support.to_string()]);
    }
    t
}

pub fn migration(report: &RelocationReport) -> CsvTable {
    let mut t = CsvTable::new(&["from", "to", "count", "normalized"]);
    for f in &report.migration.flows {
        t.push(vec![f.from.clone(), f.to.clone(), f.count.to_string(), num(f.normalized)]);
    }
    t
}

pub fn rqi(report: &RelocationReport) -> CsvTable {
    let mut t = CsvTable::new(&["from", "to", "sector", "mean_from", "mean_to", "rqi"]);
    for p in &report.pairs {
        for s in &p.rqi.per_sector {
            t.push(vec![
                p.from.clone(),
                p.to.clone(),
                s.sector.key().into(),
                num(s.mean_from),
                num(s.mean_to),
                num(s.rqi),
            ]);
        }
        t.push(vec![
            p.from.clone(),
            p.to.clone(),
            "overall".into(),
            String::new(),
            String::new(),
            opt(p.rqi.overall),
        ]);
    }
    t
}

pub fn pqi(report: &RelocationReport) -> CsvTable {
    let mut t = CsvTable::new(&["from", "to", "sector", "mean_pqi", "count", "undefined"]);
    for p in &report.pairs {
        for s in &p.pqi {
            t.push(vec![
                p.from.clone(),
                p.to.clone(),
                s.sector.key().into(),
                opt(s.mean),
                s.count.to_string(),
                s.undefined.to_string(),
            ]);
        }
    }
    t
}

pub fn rqi_global(report: &RelocationReport) -> CsvTable {
    let mut t = CsvTable::new(&["sector", "mean_rqi", "pairs"]);
    for g in &report.global {
        t.push(vec![g.sector.key().into(), opt(g.mean_rqi), g.pairs.to_string()]);
    }
    t
}

pub fn results(rows: &[ResultsRow]) -> CsvTable {
    let mut t = CsvTable::new(&["sampling", "feature_set", "class", "recall", "precision", "accuracy"]);
    for r in rows {
        t.push(vec![
            r.sampling.label().into(),
            r.feature_set.clone(),
            r.class.clone(),
            opt(r.recall),
            opt(r.precision),
            opt(r.accuracy),
        ]);
    }
    t
}

pub fn roc(results: &[ExperimentResult]) -> CsvTable {
    let mut t = CsvTable::new(&["sampling", "feature_set", "class", "fpr", "tpr", "auc"]);
    for r in results {
        let tag = |t: &mut CsvTable, class: String, pts: &[crate::qol::RocPoint], auc: Option<f64>| {
            for p in pts {
                t.push(vec![
                    r.sampling.label().into(),
                    r.feature_set.label().into(),
                    class.clone(),
                    num(p.fpr),
                    num(p.tpr),
                    opt(auc),
                ]);
            }
        };
        for m in &r.eval.classes {
            tag(&mut t, m.class.to_string(), &m.roc, m.auc);
        }
        tag(&mut t, "macro".into(), &r.eval.macro_roc, r.eval.macro_auc);
    }
    t
}

pub fn significance(report: &SignificanceReport) -> CsvTable {
    let mut t = CsvTable::new(&["feature", "statistic", "df", "p_value", "unstable", "method"]);
    for f in &report.features {
        t.push(vec![
            f.feature.clone(),
            num(f.statistic),
            f.df.to_string(),
            num(f.p_value),
            f.unstable.to_string(),
            report.method.clone(),
        ]);
    }
    t
}

pub fn crosscheck(rows: &[CrosscheckRow]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "sector",
        "ranking",
        "optimal_gain_pct",
        "p_value",
        "proposals",
        "satisfaction_item",
    ]);
    for r in rows {
        t.push(vec![
            r.sector.clone(),
            r.ranking.map(|v| v.to_string()).unwrap_or_default(),
            num(r.optimal_gain_pct),
            opt(r.p_value),
            r.proposals.to_string(),
            r.satisfaction_item.clone().unwrap_or_default(),
        ]);
    }
    t
}
