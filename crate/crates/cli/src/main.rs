use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use citeheat::entropy::Unit;
use citeheat::pipeline::{self, ConfigLayer, RunConfig, YearInput};
use citeheat::Error;

/// Flags critical transitions in three years of journal citation data.
#[derive(Parser, Debug)]
#[command(name = "citeheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every stage: ingest, flag-journals, flag-links, graph, export.
    Run(Settings),
    /// Parse, rename and align the three years; prints the data summary.
    Ingest(Settings),
    /// Node-level rankings and flags from the ingested data.
    FlagJournals(Settings),
    /// Link-level flags (hot links) from the ingested data.
    FlagLinks(Settings),
    /// Hot-link graph, components and communities.
    Graph(Settings),
    /// Pajek/VOSviewer/overlay exports from the graph stage.
    Export(Settings),
}

#[derive(Args, Debug)]
struct Settings {
    /// Flat key = value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Year input as <label>=<path>; give exactly three.
    #[arg(long = "year", value_name = "LABEL=PATH")]
    years: Vec<YearInput>,
    /// Rename table (old_name<TAB>new_name).
    #[arg(long)]
    renames: Option<PathBuf>,
    /// Standard-deviation multiplier for all thresholds.
    #[arg(long)]
    k: Option<f64>,
    /// Reporting unit: bits, mbits or microbits.
    #[arg(long)]
    unit: Option<Unit>,
    /// Node to remove before analysis (repeatable).
    #[arg(long = "exclude", value_name = "NAME")]
    exclude: Vec<String>,
    /// Keep self-citation links among the flagged links.
    #[arg(long)]
    keep_loops: bool,
    /// Seed for community detection.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "CITEHEAT_OUT")]
    out: Option<PathBuf>,
    /// Base map (label, x, y[, cluster, weight]) for overlays and coordinates.
    #[arg(long)]
    basemap: Option<PathBuf>,
    /// Worker thread cap; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Community detector: louvain or components.
    #[arg(long)]
    community: Option<String>,
    /// Comma-separated export formats (vosviewer, overlay, giant).
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
}

impl Settings {
    fn resolve(self) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            years: self.years,
            renames: self.renames,
            k: self.k,
            unit: self.unit,
            exclude: self.exclude,
            keep_loops: self.keep_loops.then_some(true),
            seed: self.seed,
            out: self.out,
            basemap: self.basemap,
            threads: self.threads,
            community: self.community,
            formats: self.formats,
            neutral_color: None,
        };
        file.merge(flags).resolve()
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (settings, stage) = match cli.command {
        Command::Run(s) => (s, "run"),
        Command::Ingest(s) => (s, "ingest"),
        Command::FlagJournals(s) => (s, "flag-journals"),
        Command::FlagLinks(s) => (s, "flag-links"),
        Command::Graph(s) => (s, "graph"),
        Command::Export(s) => (s, "export"),
    };
    let cfg = settings.resolve()?;
    if let Some(n) = cfg.threads {
        pipeline::configure_threads(n)?;
    }
    let files = match stage {
        "run" => {
            let outcome = pipeline::run_pipeline(&cfg)?;
            print!("{}", outcome.data_summary);
            outcome.files
        }
        "ingest" => {
            let outcome = pipeline::ingest(&cfg)?;
            print!("{}", outcome.data_summary);
            outcome.files
        }
        "flag-journals" => pipeline::flag_journals(&cfg)?,
        "flag-links" => pipeline::flag_links(&cfg)?,
        "graph" => pipeline::graph(&cfg)?,
        _ => pipeline::export(&cfg)?,
    };
    log::info!(
        "wrote {} files:\n{}",
        files.len(),
        pipeline::describe_files(&cfg.out, &files)
    );
    println!("{stage}: wrote {} files under {}", files.len(), cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
