use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use civic_core::qol::{FeatureSet, PipelineConfig, Sampling};
use civic_core::report::{execute, Command, ErrorRecord, Format, RunConfig};
use civic_core::survey::Axis;
use civic_core::Error;

/// Legitimacy, relocation and quality-of-life analytics over an encoded
/// citizen survey.
#[derive(Debug, Parser)]
#[command(name = "civic", version)]
struct Cli {
    /// Survey CSV file.
    #[arg(long, env = "CIVIC_DATA", global = true)]
    data: Option<PathBuf>,
    /// Schema config (JSON) describing labels and column mapping.
    #[arg(long, env = "CIVIC_SCHEMA", global = true)]
    schema: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, env = "CIVIC_OUT", global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, env = "CIVIC_SEED", global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "CIVIC_FORMAT", global = true, default_value = "json", value_parser = parse_format)]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    /// Sectors ranked within each neighborhood.
    Sectors,
    /// Neighborhoods ranked within each sector.
    Neighborhoods,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Axis {
        match a {
            AxisArg::Sectors => Axis::SectorsWithinNeighborhood,
            AxisArg::Neighborhoods => Axis::NeighborhoodsWithinSector,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Validate the survey and summarize accepted and rejected rows.
    Ingest,
    /// Legitimacy curves per scope.
    Legitimacy {
        #[arg(long, value_enum, default_value = "sectors")]
        axis: AxisArg,
        /// Restrict to one neighborhood (or sector with --axis neighborhoods).
        #[arg(long)]
        scope: Option<String>,
        /// Also report L(k) for this k.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Knee of each legitimacy curve and the resulting portfolio.
    OptimalK {
        #[arg(long, value_enum, default_value = "sectors")]
        axis: AxisArg,
    },
    /// Migration flows, RQI and PQI.
    Relocation {
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Train and evaluate the quality-of-life classifier.
    Train {
        #[arg(long, default_value = "SP", value_parser = parse_features)]
        features: FeatureSet,
        #[arg(long, default_value = "smote", value_parser = parse_sampling)]
        sampling: Sampling,
        /// Pipeline config (JSON); missing fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Per-feature likelihood-ratio significance.
    Significance,
    /// Every table and plot-data series in one run.
    ReportAll {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<Format, Error> {
    s.parse()
}

fn parse_features(s: &str) -> Result<FeatureSet, Error> {
    s.parse()
}

fn parse_sampling(s: &str) -> Result<Sampling, Error> {
    s.parse()
}

fn pipeline(path: Option<&Path>) -> Result<PipelineConfig, Error> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: PipelineConfig = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("invalid config {}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn run_config(cli: Cli) -> Result<RunConfig, Error> {
    let command = match cli.command {
        Cmd::Ingest => Command::Ingest,
        Cmd::Legitimacy { axis, scope, k } => Command::Legitimacy {
            axis: axis.into(),
            scope,
            k,
        },
        Cmd::OptimalK { axis } => Command::OptimalK { axis: axis.into() },
        Cmd::Relocation { from, to } => Command::Relocation { from, to },
        Cmd::Train {
            features,
            sampling,
            config,
        } => Command::Train {
            features,
            sampling,
            pipeline: pipeline(config.as_deref())?,
        },
        Cmd::Significance => Command::Significance,
        Cmd::ReportAll { config } => Command::ReportAll {
            pipeline: pipeline(config.as_deref())?,
        },
    };
    let data = cli
        .data
        .ok_or_else(|| Error::InvalidArgument("--data (or CIVIC_DATA) is required".into()))?;
    let schema = cli
        .schema
        .ok_or_else(|| Error::InvalidArgument("--schema (or CIVIC_SCHEMA) is required".into()))?;
    Ok(RunConfig {
        data,
        schema,
        out: cli.out,
        seed: cli.seed,
        format: cli.format,
        command,
    })
}

fn fail(e: &Error) -> ExitCode {
    let record = ErrorRecord::from_error(e);
    eprintln!("{}", record.to_json());
    ExitCode::from(record.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(&Error::InvalidArgument(e.kind().to_string()));
        }
    };
    let config = match run_config(cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    match execute(&config) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
