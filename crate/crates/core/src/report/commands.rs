//! Subcommand execution: load, compute, emit artifacts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::legitimacy::{analyze_axis, analyze_scope, legitimacy_map, ScopeAnalysis};
use crate::qol::{
    assemble_features, feature_significance, optimal_gain_crosscheck, results_rows, run_experiment,
    CrosscheckRow, EvalReport, ExperimentResult, FeatureSet, ModelFile, PipelineConfig,
    ResultsRow, Sampling, SignificanceReport,
};
use crate::relocation::{relocation_report_with, rqi, PairAssessment, RelocationReport};
use crate::report::tables::{self, CsvTable};
use crate::report::{csv_bytes, json_bytes, write_atomic, AuditHeader, Command, Format, RunConfig};
use crate::survey::{
    load_survey, mean_satisfaction, sector_totals, Axis, LoadReport, SatisfactionMatrix,
    SatisfactionSector, SchemaConfig, SurveyDataset,
};

struct Sink<'a> {
    config: &'a RunConfig,
    audit: AuditHeader,
    written: Vec<PathBuf>,
}

impl Sink<'_> {
    fn json<T: Serialize>(&mut self, file: &str, artifact: &str, data: &T) -> Result<()> {
        let path = self.config.out.join(file);
        write_atomic(&path, &json_bytes(&self.audit, artifact, data)?)?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, file: &str, table: &CsvTable) -> Result<()> {
        let path = self.config.out.join(file);
        write_atomic(&path, &csv_bytes(&self.audit, table)?)?;
        self.written.push(path);
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct IngestSummary<'a> {
    respondents: usize,
    rejected: usize,
    flagged: usize,
    per_neighborhood: BTreeMap<&'a str, usize>,
    relocations: usize,
    proposals: u64,
    proposals_per_sector: BTreeMap<String, u64>,
    load_report: &'a LoadReport,
}

fn ingest_summary<'a>(ds: &'a SurveyDataset, report: &'a LoadReport) -> IngestSummary<'a> {
    let mut per_neighborhood: BTreeMap<&str, usize> =
        ds.neighborhood_labels.iter().map(|n| (n.as_str(), 0)).collect();
    for r in &ds.responses {
        *per_neighborhood.entry(r.neighborhood.as_str()).or_default() += 1;
    }
    let per_sector = sector_totals(ds);
    IngestSummary {
        respondents: ds.len(),
        rejected: report.rejected.len(),
        flagged: report.flagged.len(),
        per_neighborhood,
        relocations: ds.responses.iter().filter(|r| r.relocation().is_some()).count(),
        proposals: per_sector.values().sum(),
        proposals_per_sector: per_sector,
        load_report: report,
    }
}

#[derive(Debug, Serialize)]
struct AtK {
    scope: String,
    legitimacy: Option<f64>,
    share_pct: Option<f64>,
}

#[derive(Debug, Serialize)]
struct LegitimacyArtifact<'a> {
    axis: Axis,
    k: Option<usize>,
    at_k: Vec<AtK>,
    scopes: &'a [ScopeAnalysis],
}

#[derive(Debug, Serialize)]
struct ExperimentSummary<'a> {
    feature_set: FeatureSet,
    sampling: Sampling,
    seed: u64,
    protocol: &'a str,
    columns: &'a [String],
    rows_used: usize,
    rows_dropped: usize,
    train_size: usize,
    train_size_sampled: usize,
    test_size: usize,
    train_class_counts: [usize; 4],
    final_loss: f64,
    eval: &'a EvalReport,
}

impl<'a> From<&'a ExperimentResult> for ExperimentSummary<'a> {
    fn from(r: &'a ExperimentResult) -> Self {
        ExperimentSummary {
            feature_set: r.feature_set,
            sampling: r.sampling,
            seed: r.seed,
            protocol: &r.protocol,
            columns: &r.columns,
            rows_used: r.rows_used,
            rows_dropped: r.rows_dropped,
            train_size: r.train_size,
            train_size_sampled: r.train_size_sampled,
            test_size: r.test_size,
            train_class_counts: r.train_class_counts,
            final_loss: r.model.final_loss,
            eval: &r.eval,
        }
    }
}

#[derive(Debug, Serialize)]
struct SignificanceArtifact<'a> {
    feature_set: FeatureSet,
    rows_used: usize,
    rows_dropped: usize,
    report: &'a SignificanceReport,
}

#[derive(Debug, Serialize)]
struct RelocationArtifact<'a> {
    satisfaction: &'a SatisfactionMatrix,
    report: &'a RelocationReport,
}

#[derive(Debug, Serialize)]
struct LegitimacyBundle<'a> {
    sectors_within_neighborhood: &'a [ScopeAnalysis],
    neighborhoods_within_sector: &'a [ScopeAnalysis],
}

#[derive(Debug, Serialize)]
struct ClassifierBundle<'a> {
    pipeline: &'a PipelineConfig,
    experiments: Vec<ExperimentSummary<'a>>,
    results_table: &'a [ResultsRow],
}

#[derive(Debug, Serialize)]
struct Bundle<'a> {
    ingest: IngestSummary<'a>,
    legitimacy: LegitimacyBundle<'a>,
    satisfaction: &'a SatisfactionMatrix,
    relocation: &'a RelocationReport,
    classifier: ClassifierBundle<'a>,
    significance: SignificanceArtifact<'a>,
    sector_crosscheck: &'a [CrosscheckRow],
}

fn file_tag(set: FeatureSet, sampling: Sampling) -> String {
    let set = match set {
        FeatureSet::S => "S",
        FeatureSet::P => "P",
        FeatureSet::SP => "SP",
    };
    format!("{set}_{}", sampling.label())
}

/// Feature set used for significance and the sector cross-check table.
const SIGNIFICANCE_FEATURES: FeatureSet = FeatureSet::SP;

/// Run one command and return the artifact paths it wrote, in write order.
pub fn execute(config: &RunConfig) -> Result<Vec<PathBuf>> {
    if !config.data.exists() {
        return Err(Error::DatasetNotFound(config.data.clone()));
    }
    let schema = SchemaConfig::from_path(&config.schema)?;
    let (ds, load) = load_survey(&config.data, &schema)?;
    if ds.is_empty() {
        return Err(Error::NoDataRows);
    }
    let mut sink = Sink {
        config,
        audit: config.audit(),
        written: Vec::new(),
    };
    let csv = config.format == Format::Csv;

    match &config.command {
        Command::Ingest => {
            if csv {
                sink.csv("ingest_issues.csv", &tables::ingest_rejected(&load))?;
            } else {
                sink.json("ingest.json", "ingest", &ingest_summary(&ds, &load))?;
            }
        }
        Command::Legitimacy { axis, scope, k } => {
            let analyses = match scope {
                Some(s) => vec![analyze_scope(&ds, *axis, s)?],
                None => analyze_axis(&ds, *axis)?,
            };
            if *k == Some(0) {
                return Err(Error::InvalidArgument("k must be >= 1".into()));
            }
            let at_k: Vec<AtK> = match k {
                Some(k) => analyses
                    .iter()
                    .map(|a| {
                        let c = a.curve.as_ref().filter(|c| *k <= c.len());
                        AtK {
                            scope: a.scope.clone(),
                            legitimacy: c.map(|c| c.legitimacy[k - 1]),
                            share_pct: c.map(|c| c.share[k - 1] * 100.0),
                        }
                    })
                    .collect(),
                None => Vec::new(),
            };
            if let (Some(k), Some(_)) = (k, scope) {
                if at_k.iter().all(|a| a.legitimacy.is_none()) {
                    let n = analyses[0].counts.len();
                    return Err(Error::InvalidArgument(format!("k = {k} is out of range 1..={n}")));
                }
            }
            let name = format!("legitimacy_{}", axis.short());
            if csv {
                sink.csv(&format!("{name}.csv"), &tables::legitimacy_curves(&analyses, *k))?;
            } else {
                let art = LegitimacyArtifact {
                    axis: *axis,
                    k: *k,
                    at_k,
                    scopes: &analyses,
                };
                sink.json(&format!("{name}.json"), "legitimacy", &art)?;
            }
        }
        Command::OptimalK { axis } => {
            let analyses = analyze_axis(&ds, *axis)?;
            let name = format!("optimal_k_{}", axis.short());
            if csv {
                sink.csv(&format!("{name}.csv"), &tables::optimal_k(&analyses))?;
                sink.csv(
                    &format!("legitimacy_map_{}.csv", axis.short()),
                    &tables::legitimacy_map(&analyses),
                )?;
            } else {
                sink.json(&format!("{name}.json"), "optimal-k", &analyses)?;
            }
        }
        Command::Relocation { from, to } => {
            let sat = mean_satisfaction(&ds);
            let mut report = relocation_report_with(&ds, &sat)?;
            for label in [from, to].into_iter().flatten() {
                if !ds.has_neighborhood(label) {
                    return Err(Error::UnknownLabel(label.clone()));
                }
            }
            if from.is_some() || to.is_some() {
                report.pairs.retain(|p| {
                    from.as_ref().is_none_or(|f| &p.from == f) && to.as_ref().is_none_or(|t| &p.to == t)
                });
                if let (Some(f), Some(t), true) = (from, to, report.pairs.is_empty()) {
                    report.pairs.push(PairAssessment {
                        from: f.clone(),
                        to: t.clone(),
                        flow: 0,
                        normalized: 0.0,
                        rqi: rqi(&sat, f, t, &SatisfactionSector::ALL),
                        pqi: Vec::new(),
                    });
                }
            }
            if csv {
                write_relocation_csvs(&mut sink, &sat, &report)?;
            } else {
                let art = RelocationArtifact {
                    satisfaction: &sat,
                    report: &report,
                };
                sink.json("relocation.json", "relocation", &art)?;
            }
        }
        Command::Train {
            features,
            sampling,
            pipeline,
        } => {
            let r = run_experiment(&ds, *features, *sampling, pipeline, config.seed)?;
            let tag = file_tag(*features, *sampling);
            let model = ModelFile::new(&r.model, r.feature_set, r.columns.clone(), r.scaler.clone());
            sink.json(&format!("model_{tag}.json"), "model", &model)?;
            if csv {
                sink.csv(&format!("eval_{tag}.csv"), &tables::results(&results_rows(std::slice::from_ref(&r))))?;
                sink.csv(&format!("roc_{tag}.csv"), &tables::roc(std::slice::from_ref(&r)))?;
            } else {
                sink.json(&format!("eval_{tag}.json"), "evaluation", &ExperimentSummary::from(&r))?;
            }
        }
        Command::Significance => {
            let x = assemble_features(&ds, SIGNIFICANCE_FEATURES, PipelineConfig::default().unknown_policy);
            let report = feature_significance(&x)?;
            if csv {
                sink.csv("significance.csv", &tables::significance(&report))?;
            } else {
                let art = SignificanceArtifact {
                    feature_set: SIGNIFICANCE_FEATURES,
                    rows_used: x.len(),
                    rows_dropped: x.dropped,
                    report: &report,
                };
                sink.json("significance.json", "significance", &art)?;
            }
        }
        Command::ReportAll { pipeline } => report_all(&mut sink, &ds, &schema, &load, pipeline, csv)?,
    }
    Ok(sink.written)
}

fn write_relocation_csvs(sink: &mut Sink<'_>, sat: &SatisfactionMatrix, report: &RelocationReport) -> Result<()> {
    sink.csv("satisfaction.csv", &tables::satisfaction(sat))?;
    sink.csv("migration.csv", &tables::migration(report))?;
    sink.csv("rqi.csv", &tables::rqi(report))?;
    sink.csv("pqi.csv", &tables::pqi(report))?;
    sink.csv("rqi_global.csv", &tables::rqi_global(report))
}

fn report_all(
    sink: &mut Sink<'_>,
    ds: &SurveyDataset,
    schema: &SchemaConfig,
    load: &LoadReport,
    pipeline: &PipelineConfig,
    csv: bool,
) -> Result<()> {
    let seed = sink.config.seed;
    let by_hood = analyze_axis(ds, Axis::SectorsWithinNeighborhood)?;
    let by_sector = analyze_axis(ds, Axis::NeighborhoodsWithinSector)?;
    let sat = mean_satisfaction(ds);
    let relocation = relocation_report_with(ds, &sat)?;

    let mut experiments = Vec::new();
    for sampling in Sampling::ALL {
        for set in [FeatureSet::S, FeatureSet::P, FeatureSet::SP] {
            experiments.push(run_experiment(ds, set, sampling, pipeline, seed)?);
        }
    }
    let table3 = results_rows(&experiments);

    let x = assemble_features(ds, SIGNIFICANCE_FEATURES, pipeline.unknown_policy);
    let significance = feature_significance(&x)?;
    let maps = legitimacy_map(ds, Axis::SectorsWithinNeighborhood)?;
    let table2 = optimal_gain_crosscheck(
        &maps,
        &sector_totals(ds),
        &schema.sectors,
        &schema.sector_satisfaction_map,
        Some(&significance),
    );

    if csv {
        sink.csv("ingest_issues.csv", &tables::ingest_rejected(load))?;
        for (axis, a) in [(Axis::SectorsWithinNeighborhood, &by_hood), (Axis::NeighborhoodsWithinSector, &by_sector)] {
            sink.csv(&format!("legitimacy_{}.csv", axis.short()), &tables::legitimacy_curves(a, None))?;
            sink.csv(&format!("optimal_k_{}.csv", axis.short()), &tables::optimal_k(a))?;
            sink.csv(&format!("legitimacy_map_{}.csv", axis.short()), &tables::legitimacy_map(a))?;
        }
        write_relocation_csvs(sink, &sat, &relocation)?;
        sink.csv("classifier_results.csv", &tables::results(&table3))?;
        sink.csv("classifier_roc.csv", &tables::roc(&experiments))?;
        sink.csv("significance.csv", &tables::significance(&significance))?;
        sink.csv("sector_crosscheck.csv", &tables::crosscheck(&table2))?;
    } else {
        let bundle = Bundle {
            ingest: ingest_summary(ds, load),
            legitimacy: LegitimacyBundle {
                sectors_within_neighborhood: &by_hood,
                neighborhoods_within_sector: &by_sector,
            },
            satisfaction: &sat,
            relocation: &relocation,
            classifier: ClassifierBundle {
                pipeline,
                experiments: experiments.iter().map(ExperimentSummary::from).collect(),
                results_table: &table3,
            },
            significance: SignificanceArtifact {
                feature_set: SIGNIFICANCE_FEATURES,
                rows_used: x.len(),
                rows_dropped: x.dropped,
                report: &significance,
            },
            sector_crosscheck: &table2,
        };
        sink.json("report.json", "report-all", &bundle)?;
    }
    Ok(())
}
