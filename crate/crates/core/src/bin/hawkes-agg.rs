use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use hawkes_agg::bench::{self, ExperimentConfig, FitConfig, RecordSet, RunRecord};
use hawkes_agg::io;
use hawkes_agg::simulate::{SimConfig, DEFAULT_EVENT_CAP};
use hawkes_agg::{aggregate, BinSpec, HawkesError, HawkesParams};

#[derive(Parser)]
#[command(name = "hawkes-agg", version, about = "Hawkes process estimation from binned counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate events and optionally bin them.
    Simulate(Common),
    /// Fit a counts CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Counts CSV: a `count` column, or `lower,upper,count`.
        #[arg(long)]
        counts: PathBuf,
    },
    /// Run a simulation study.
    Bench(Common),
    /// Summarize and plot an existing records.csv or records.json.
    Summarize {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    params: HawkesParams,
    horizon: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    bin_width: Option<f64>,
    #[serde(default)]
    event_cap: Option<usize>,
}

enum Failure {
    Config(String),
    Partial(String),
    Other(String),
}

impl From<HawkesError> for Failure {
    fn from(e: HawkesError) -> Self {
        match e {
            HawkesError::Config(_) | HawkesError::Json(_) | HawkesError::InvalidParams(_) => Failure::Config(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

fn load<T: for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<Option<T>, Failure> {
    match path {
        None => Ok(None),
        Some(p) => io::read_json(p).map(Some).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
    }
}

fn out_dir(out: Option<PathBuf>, fallback: PathBuf) -> Result<PathBuf, Failure> {
    let dir = out.unwrap_or(fallback);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Other(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn print_records(records: &[RunRecord], names: &[String]) {
    for r in records {
        let est: Vec<String> = names.iter().zip(&r.estimates).map(|(n, v)| format!("{n}={v:.6}")).collect();
        let delta = r.delta.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
        let extra = r.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default();
        println!("{:<18} delta={delta:<6} rep={:<3} {:<12} {}{extra}", r.method, r.replicate, r.status.as_str(), est.join(" "));
    }
}

fn check_failures(records: &[RunRecord], threshold: f64) -> Result<(), Failure> {
    let frac = bench::failure_fraction(records);
    if frac > threshold {
        return Err(Failure::Partial(format!("{:.0}% of fits failed (threshold {:.0}%)", 100.0 * frac, 100.0 * threshold)));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(c) => {
            let file: SimulateFile =
                load(c.config.as_deref())?.ok_or_else(|| Failure::Config("simulate needs --config".into()))?;
            let cfg = SimConfig {
                params: file.params,
                horizon: file.horizon,
                seed: c.seed.unwrap_or(file.seed),
                event_cap: file.event_cap.unwrap_or(DEFAULT_EVENT_CAP),
            };
            cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
            let events = hawkes_agg::simulate(&cfg)?;
            let dir = out_dir(c.out, PathBuf::from("."))?;
            io::write_events_csv(&events, BufWriter::new(File::create(dir.join("events.csv")).map_err(HawkesError::from)?))?;
            println!("{} events on [0, {}]", events.len(), cfg.horizon);
            if let Some(width) = file.bin_width {
                let spec = BinSpec::covering(cfg.horizon, width).map_err(|e| Failure::Config(e.to_string()))?;
                let counts = aggregate(&events, &spec)?;
                let f = File::create(dir.join("counts.csv")).map_err(HawkesError::from)?;
                io::write_counts_csv(&counts, BufWriter::new(f))?;
                println!("{} bins of width {width}", counts.len());
            }
            Ok(())
        }
        Command::Fit { common, counts } => {
            let mut cfg: FitConfig = load(common.config.as_deref())?.unwrap_or_default();
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
            let file = File::open(&counts).map_err(|e| Failure::Config(format!("{}: {e}", counts.display())))?;
            let data = io::read_counts_csv(file).map_err(|e| Failure::Config(format!("{}: {e}", counts.display())))?;
            let records = bench::fit_counts(&cfg, &data)?;
            let names = cfg.param_names();
            print_records(&records, &names);
            let dir = out_dir(common.out, PathBuf::from("."))?;
            bench::write_records_csv(&records, &names, &dir.join("records.csv"))?;
            io::write_json(&RecordSet { parameters: names, records: records.clone() }, &dir.join("records.json"))?;
            check_failures(&records, cfg.failure_threshold)
        }
        Command::Bench(c) => {
            let mut cfg: ExperimentConfig =
                load(c.config.as_deref())?.ok_or_else(|| Failure::Config("bench needs --config".into()))?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            if let Some(o) = c.out {
                cfg.output_dir = o;
            }
            cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
            let records = bench::run_experiment(&cfg)?;
            let summary = bench::write_outputs(&cfg, &records)?;
            println!("{} records, {} summary rows, written to {}", records.len(), summary.rows.len(), cfg.output_dir.display());
            check_failures(&records, cfg.failure_threshold)
        }
        Command::Summarize { records, out } => {
            let (recs, names) = if records.extension().is_some_and(|e| e == "json") {
                let set: RecordSet =
                    io::read_json(&records).map_err(|e| Failure::Config(format!("{}: {e}", records.display())))?;
                (set.records, set.parameters)
            } else {
                bench::read_records_csv(&records).map_err(|e| Failure::Config(format!("{}: {e}", records.display())))?
            };
            let dir = out_dir(out, records.parent().map(Path::to_path_buf).unwrap_or_default())?;
            let summary = bench::summarize(&recs, &names)?;
            std::fs::write(dir.join("summary.csv"), bench::summary_to_csv(&summary)?).map_err(HawkesError::from)?;
            io::write_json(&summary, &dir.join("summary.json"))?;
            match bench::emit_plots(&summary, &dir) {
                Ok(_) | Err(HawkesError::EmptySummary) => {}
                Err(e) => return Err(e.into()),
            }
            println!("{} summary rows written to {}", summary.rows.len(), dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Partial(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
