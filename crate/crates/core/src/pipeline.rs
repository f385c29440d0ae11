//! End-to-end run: ingest → flag journals → flag links → graph → export.
//!
//! Every stage reads its inputs from the previous stage's files under the
//! output directory, so running the stages one by one gives the same
//! artifact tree as [`run_pipeline`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    apply_name_changes, build_common_set, compare_year_labels, count_renamed, parse_edge_list, parse_renames,
    resolve_renames, AlignedTensor, JournalRegistry, YearMatrix, YearPair, YearStats,
};
use crate::entropy::{Direction, Unit};
use crate::error::{Error, Result};
use crate::flags::{analyze, remove_outliers, FlagReport, FlagSettings};
use crate::io_export::overlay::{parse_basemap, OverlayCategory};
use crate::io_export::pajek::{read_pajek_clu, read_pajek_net, write_pajek_clu, write_pajek_net};
use crate::io_export::reports::{
    read_hot_links, read_labels_where, write_graph_reports, write_journal_reports, write_link_reports, FORMAT_VERSION,
};
use crate::io_export::{exporters, open_file, write_file, ExportContext, OverlayFigure};
use crate::netgraph::{community_detectors, connected_components, HotLinkGraph};

pub const INGEST_DIR: &str = "ingest";
pub const JOURNALS_DIR: &str = "journals";
pub const LINKS_DIR: &str = "links";
pub const GRAPH_DIR: &str = "graph";
pub const EXPORT_DIR: &str = "export";

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_NEUTRAL_COLOR: &str = "#d9d9d9";
const RED: &str = "#e41a1c";
const BLUE: &str = "#377eb8";
const ORANGE: &str = "#ff7f00";

/// One `<label>=<path>` year input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearInput {
    pub label: String,
    pub path: PathBuf,
}

impl FromStr for YearInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('=') {
            Some((label, path)) if !label.trim().is_empty() && !path.trim().is_empty() => Ok(YearInput {
                label: label.trim().to_string(),
                path: PathBuf::from(path.trim()),
            }),
            _ => Err(Error::Config(format!(
                "year input {s:?} must have the form <label>=<path>"
            ))),
        }
    }
}

/// Partially specified settings, from a config file or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub years: Vec<YearInput>,
    pub renames: Option<PathBuf>,
    pub k: Option<f64>,
    pub unit: Option<Unit>,
    pub exclude: Vec<String>,
    pub keep_loops: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub basemap: Option<PathBuf>,
    pub threads: Option<usize>,
    pub community: Option<String>,
    pub formats: Option<Vec<String>>,
    pub neutral_color: Option<String>,
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

impl ConfigLayer {
    /// Reads a flat `key = value` file. `#` starts a comment line; `year`
    /// and `exclude` may repeat. Relative paths resolve against the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, path, base)
    }

    pub fn parse(text: &str, source: &Path, base: &Path) -> Result<Self> {
        let mut layer = ConfigLayer::default();
        let resolve = |p: &str| {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Config(format!("{}:{}: {msg}", source.display(), i + 1));
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            match key {
                "year" => {
                    let y: YearInput = value
                        .parse()
                        .map_err(|_| bad(format!("year must be <label>=<path>, got {value:?}")))?;
                    layer.years.push(YearInput {
                        path: resolve(&y.path.to_string_lossy()),
                        ..y
                    });
                }
                "renames" => layer.renames = Some(resolve(value)),
                "k" => {
                    layer.k = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("k must be a number, got {value:?}")))?,
                    )
                }
                "unit" => layer.unit = Some(value.parse().map_err(|e: Error| bad(e.to_string()))?),
                "exclude" => layer.exclude.push(value.to_string()),
                "keep_loops" => {
                    layer.keep_loops = Some(
                        parse_bool(value)
                            .ok_or_else(|| bad(format!("keep_loops must be true or false, got {value:?}")))?,
                    )
                }
                "seed" => {
                    layer.seed = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("seed must be a non-negative integer, got {value:?}")))?,
                    )
                }
                "out" => layer.out = Some(resolve(value)),
                "basemap" => layer.basemap = Some(resolve(value)),
                "threads" => {
                    layer.threads = Some(
                        value
                            .parse()
                            .map_err(|_| bad(format!("threads must be a positive integer, got {value:?}")))?,
                    )
                }
                "community" => layer.community = Some(value.to_string()),
                "formats" => layer.formats = Some(split_list(value)),
                "neutral_color" => layer.neutral_color = Some(value.to_string()),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(layer)
    }

    /// Field-wise override: anything set in `over` wins. Repeatable fields
    /// are replaced as a whole when `over` has any entries.
    pub fn merge(self, over: ConfigLayer) -> ConfigLayer {
        fn pick<T>(base: Vec<T>, over: Vec<T>) -> Vec<T> {
            if over.is_empty() {
                base
            } else {
                over
            }
        }
        ConfigLayer {
            years: pick(self.years, over.years),
            renames: over.renames.or(self.renames),
            k: over.k.or(self.k),
            unit: over.unit.or(self.unit),
            exclude: pick(self.exclude, over.exclude),
            keep_loops: over.keep_loops.or(self.keep_loops),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            basemap: over.basemap.or(self.basemap),
            threads: over.threads.or(self.threads),
            community: over.community.or(self.community),
            formats: over.formats.or(self.formats),
            neutral_color: over.neutral_color.or(self.neutral_color),
        }
    }

    /// Fills defaults. Year inputs are not checked here; see
    /// [`RunConfig::validate_years`].
    pub fn resolve(self) -> Result<RunConfig> {
        let cfg = RunConfig {
            years: self.years,
            renames: self.renames,
            k: self.k.unwrap_or(1.0),
            unit: self.unit.unwrap_or_default(),
            exclude: self.exclude,
            drop_loops: !self.keep_loops.unwrap_or(false),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            out: self
                .out
                .ok_or_else(|| Error::Config("no output directory (use --out or CITEHEAT_OUT)".into()))?,
            basemap: self.basemap,
            threads: self.threads,
            community: self.community.unwrap_or_else(|| "louvain".to_string()),
            formats: self
                .formats
                .unwrap_or_else(|| exporters().names().into_iter().map(String::from).collect()),
            neutral_color: self.neutral_color.unwrap_or_else(|| DEFAULT_NEUTRAL_COLOR.to_string()),
        };
        cfg.validate_settings()?;
        Ok(cfg)
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub years: Vec<YearInput>,
    pub renames: Option<PathBuf>,
    pub k: f64,
    pub unit: Unit,
    pub exclude: Vec<String>,
    pub drop_loops: bool,
    pub seed: u64,
    pub out: PathBuf,
    pub basemap: Option<PathBuf>,
    pub threads: Option<usize>,
    pub community: String,
    pub formats: Vec<String>,
    pub neutral_color: String,
}

impl RunConfig {
    pub fn new(years: Vec<YearInput>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            years,
            renames: None,
            k: 1.0,
            unit: Unit::default(),
            exclude: Vec::new(),
            drop_loops: true,
            seed: DEFAULT_SEED,
            out: out.into(),
            basemap: None,
            threads: None,
            community: "louvain".to_string(),
            formats: exporters().names().into_iter().map(String::from).collect(),
            neutral_color: DEFAULT_NEUTRAL_COLOR.to_string(),
        }
    }

    fn validate_settings(&self) -> Result<()> {
        if !self.k.is_finite() || self.k < 0.0 {
            return Err(Error::Config(format!("k must be a finite number >= 0, got {}", self.k)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        community_detectors().get(&self.community)?;
        let reg = exporters();
        for f in &self.formats {
            reg.get(f)?;
        }
        Ok(())
    }

    /// Exactly three year inputs with strictly increasing labels.
    pub fn validate_years(&self) -> Result<()> {
        if self.years.len() != 3 {
            return Err(Error::Config(format!(
                "exactly three year inputs are required (--year <label>=<path>), got {}",
                self.years.len()
            )));
        }
        let labels: Vec<&str> = self.years.iter().map(|y| y.label.as_str()).collect();
        let cmp = compare_year_labels(&labels);
        if labels.windows(2).any(|w| cmp(w[0], w[1]) != std::cmp::Ordering::Less) {
            return Err(Error::Config(format!(
                "year labels must be strictly increasing, got {}",
                labels.join(", ")
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_settings()?;
        self.validate_years()
    }

    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.out.join(stage)
    }

    fn settings(&self) -> FlagSettings {
        FlagSettings {
            unit: self.unit,
            k: self.k,
            drop_loops: self.drop_loops,
            outliers_removed: self.exclude.clone(),
        }
    }
}

/// Caps the rayon worker pool. Only the first call in a process takes
/// effect; results do not depend on the thread count.
pub fn configure_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot configure {threads} threads: {e}")))
}

/// Empties a stage directory so stale files from earlier runs never mix in.
fn fresh_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Data-description counts per year plus the combined row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSummaryRow {
    pub year: String,
    pub journals: usize,
    pub cited_only: Option<usize>,
    pub links: Option<usize>,
    pub name_changes: usize,
    /// Links among the common node set in this year.
    pub common_set_links: Option<usize>,
    pub transition: String,
    /// Cells non-zero in both years of the transition (all three for the
    /// combined row).
    pub both_years_cells: usize,
    /// Cells usable as a prior: non-zero in the earlier year.
    pub prior_valid_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSummary {
    pub common_set: usize,
    pub rows: Vec<DataSummaryRow>,
}

impl DataSummary {
    fn build(tensor: &AlignedTensor, name_changes: &[usize], alias_count: usize) -> Self {
        let labels: Vec<&str> = tensor.years().iter().map(|m| m.label()).collect();
        let mut rows: Vec<DataSummaryRow> = tensor
            .input_stats()
            .iter()
            .zip(YearPair::ALL)
            .enumerate()
            .map(|(i, (s, pair))| {
                let (a, b) = pair.years();
                let valid = tensor.pair_valid(pair);
                let posterior = tensor.year(b);
                DataSummaryRow {
                    year: s.label.clone(),
                    journals: s.nodes,
                    cited_only: Some(s.cited_only),
                    links: Some(s.links),
                    name_changes: name_changes[i],
                    common_set_links: Some(s.common_links),
                    transition: format!("{}-{}", labels[a], labels[b]),
                    both_years_cells: valid.iter().filter(|c| posterior.count(c) > 0).count(),
                    prior_valid_cells: Some(valid.len()),
                }
            })
            .collect();
        rows.push(DataSummaryRow {
            year: "combined".to_string(),
            journals: tensor.input_nodes(),
            cited_only: None,
            links: None,
            name_changes: alias_count,
            common_set_links: None,
            transition: "all years".to_string(),
            both_years_cells: tensor.tri_valid().len(),
            prior_valid_cells: None,
        });
        DataSummary {
            common_set: tensor.node_count(),
            rows,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let err = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
        w.write_record([
            "year",
            "journals",
            "cited_only",
            "links",
            "name_changes",
            "common_set_links",
            "transition",
            "both_years_cells",
            "prior_valid_cells",
        ])
        .map_err(err)?;
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.year.clone(),
                r.journals.to_string(),
                opt(r.cited_only),
                opt(r.links),
                r.name_changes.to_string(),
                opt(r.common_set_links),
                r.transition.clone(),
                r.both_years_cells.to_string(),
                opt(r.prior_valid_cells),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

impl fmt::Display for DataSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Common set: {} journals citing in all three years", self.common_set)?;
        writeln!(
            f,
            "{:<10} {:>16} {:>10} {:>8} {:>12} {:>16} {:>14}",
            "year", "journals (-cited)", "links", "renamed", "common links", "transition", "both years"
        )?;
        for r in &self.rows {
            let journals = match r.cited_only {
                Some(c) => format!("{} (-{c})", r.journals),
                None => r.journals.to_string(),
            };
            let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                f,
                "{:<10} {:>16} {:>10} {:>8} {:>12} {:>16} {:>14}",
                r.year,
                journals,
                opt(r.links),
                r.name_changes,
                opt(r.common_set_links),
                r.transition,
                r.both_years_cells
            )?;
        }
        Ok(())
    }
}

/// Metadata kept next to the aligned edge lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IngestMeta {
    format_version: u32,
    years: Vec<String>,
    input_nodes: usize,
    input_stats: Vec<YearStats>,
    aliases: BTreeMap<String, String>,
    data_summary: DataSummary,
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub tensor: AlignedTensor,
    pub data_summary: DataSummary,
    pub files: Vec<PathBuf>,
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

/// Parses, renames and restricts the three years; writes the aligned edge
/// lists, node list and data summary counts under `ingest/`.
pub fn ingest(cfg: &RunConfig) -> Result<IngestOutcome> {
    cfg.validate()?;
    let named = cfg
        .years
        .par_iter()
        .map(|y| parse_edge_list(&y.path, &y.label))
        .collect::<Result<Vec<_>>>()?;
    let renames = match &cfg.renames {
        Some(p) => parse_renames(p)?,
        None => Vec::new(),
    };
    let aliases = resolve_renames(&renames)?;
    let name_changes: Vec<usize> = named.iter().map(|m| count_renamed(m, &aliases)).collect();
    let (registry, matrices) = apply_name_changes(named, &renames)?;
    let tensor = build_common_set(&registry, matrices)?;
    let data_summary = DataSummary::build(&tensor, &name_changes, aliases.len());

    let dir = cfg.stage_dir(INGEST_DIR);
    fresh_dir(&dir)?;
    let mut files = Vec::new();
    let path = dir.join("nodes.tsv");
    files.push(write_file(&path, |w| {
        writeln!(w, "id\tlabel").map_err(io_at(&path))?;
        for (i, l) in tensor.registry().labels().iter().enumerate() {
            writeln!(w, "{i}\t{l}").map_err(io_at(&path))?;
        }
        Ok(())
    })?);
    for i in 0..3 {
        let path = dir.join(format!("year_{i}.tsv"));
        let m = tensor.year(i);
        let reg = tensor.registry();
        files.push(write_file(&path, |w| {
            writeln!(w, "citing\tcited\tcount").map_err(io_at(&path))?;
            for (l, c) in m.cells() {
                writeln!(w, "{}\t{}\t{c}", reg.label(l.citing), reg.label(l.cited)).map_err(io_at(&path))?;
            }
            Ok(())
        })?);
    }
    files.push(write_file(&dir.join("data_summary.csv"), |w| {
        data_summary.write_csv(w)
    })?);
    let meta = IngestMeta {
        format_version: FORMAT_VERSION,
        years: cfg.years.iter().map(|y| y.label.clone()).collect(),
        input_nodes: tensor.input_nodes(),
        input_stats: tensor.input_stats().to_vec(),
        aliases: tensor.registry().aliases().clone(),
        data_summary: data_summary.clone(),
    };
    let path = dir.join("ingest.json");
    files.push(write_file(&path, |w| {
        let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
        writeln!(w, "{text}").map_err(io_at(&path))
    })?);
    Ok(IngestOutcome {
        tensor,
        data_summary,
        files,
    })
}

fn read_meta(out: &Path) -> Result<IngestMeta> {
    let path = out.join(INGEST_DIR).join("ingest.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: IngestMeta = serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.line(), e.to_string()))?;
    if meta.format_version != FORMAT_VERSION || meta.years.len() != 3 {
        return Err(Error::parse(&path, 1, "unsupported ingest metadata"));
    }
    Ok(meta)
}

/// Rebuilds the tensor from `ingest/`. The node list is taken as is; the
/// activity rule is not re-applied.
pub fn load_ingested(out: &Path) -> Result<AlignedTensor> {
    let meta = read_meta(out)?;
    let dir = out.join(INGEST_DIR);
    let nodes_path = dir.join("nodes.tsv");
    let text = fs::read_to_string(&nodes_path).map_err(|e| Error::io(&nodes_path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let (_, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&nodes_path, i + 1, "expected id<TAB>label"))?;
        labels.push(label.to_string());
    }
    let registry = JournalRegistry::new(labels, meta.aliases.clone());
    let mut years = Vec::with_capacity(3);
    for (i, label) in meta.years.iter().enumerate() {
        let path = dir.join(format!("year_{i}.tsv"));
        let named = parse_edge_list(&path, label)?;
        let mut records = Vec::with_capacity(named.len());
        for (l, &c) in named.cells() {
            let id = |n: &String| registry.id(n).ok_or_else(|| Error::UnknownNode(n.clone()));
            records.push((id(&l.citing)?, id(&l.cited)?, c));
        }
        years.push(YearMatrix::from_records(label.clone(), records));
    }
    let years: [YearMatrix; 3] = years
        .try_into()
        .map_err(|v: Vec<YearMatrix>| Error::YearCount(v.len()))?;
    Ok(AlignedTensor::from_parts(
        registry,
        years,
        meta.input_stats,
        meta.input_nodes,
    ))
}

/// Loads the ingested tensor, removes excluded nodes and runs every
/// indicator.
pub fn analysis(cfg: &RunConfig) -> Result<(AlignedTensor, FlagReport, Vec<String>)> {
    let meta = read_meta(&cfg.out)?;
    let mut tensor = load_ingested(&cfg.out)?;
    if !cfg.exclude.is_empty() {
        tensor = remove_outliers(&tensor, &cfg.exclude)?;
    }
    let report = analyze(&tensor, &cfg.settings())?;
    Ok((tensor, report, meta.years))
}

/// Writes node-level rankings and `summary.json` under `journals/`.
pub fn flag_journals(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let (tensor, report, years) = analysis(cfg)?;
    let dir = cfg.stage_dir(JOURNALS_DIR);
    fresh_dir(&dir)?;
    write_journal_reports(&dir, &report, tensor.registry(), &years)
}

/// Writes `links/hot_links.csv`.
pub fn flag_links(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let (tensor, report, _) = analysis(cfg)?;
    let dir = cfg.stage_dir(LINKS_DIR);
    fresh_dir(&dir)?;
    write_link_reports(&dir, &report, tensor.registry())
}

/// Builds the hot-link graph from `links/hot_links.csv`, partitions it and
/// writes Pajek files and graph reports under `graph/`.
pub fn graph(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let links = read_hot_links(&cfg.stage_dir(LINKS_DIR).join("hot_links.csv"))?;
    let graph = HotLinkGraph::from_labeled_links(links);
    let components = connected_components(&graph);
    let detectors = community_detectors();
    let detector = detectors.get(&cfg.community)?;
    let communities = detector.detect(&graph, cfg.seed);
    log::info!(
        "hot-link graph: {} nodes, {} edges, {} components, {} communities (Q = {:.6})",
        graph.node_count(),
        graph.edge_count(),
        components.len(),
        communities.community_count(),
        communities.modularity
    );

    let dir = cfg.stage_dir(GRAPH_DIR);
    fresh_dir(&dir)?;
    let net = dir.join("hot_links.net");
    let clu = dir.join("communities.clu");
    let comp_clu = dir.join("components.clu");
    let mut files = vec![
        write_file(&net, |w| write_pajek_net(&graph, w).map_err(io_at(&net)))?,
        write_file(&clu, |w| {
            write_pajek_clu(&communities.assignment, w).map_err(io_at(&clu))
        })?,
        write_file(&comp_clu, |w| {
            write_pajek_clu(&components.assignment, w).map_err(io_at(&comp_clu))
        })?,
    ];
    files.extend(write_graph_reports(
        &dir,
        &graph,
        &components,
        &communities,
        detector.name(),
    )?);
    Ok(files)
}

fn category(name: &str, color: &str, labels: BTreeSet<String>) -> OverlayCategory {
    OverlayCategory {
        name: name.to_string(),
        color: color.to_string(),
        labels,
    }
}

/// Overlay figures read back from the journal rankings and the graph.
fn overlay_figures(cfg: &RunConfig, graph: &HotLinkGraph) -> Result<Vec<OverlayFigure>> {
    let jdir = cfg.stage_dir(JOURNALS_DIR);
    let mut figures = Vec::new();
    for d in Direction::BOTH {
        let path = jdir.join(format!("margins_{d}.csv"));
        figures.push(OverlayFigure {
            name: format!("monotonic_{d}"),
            categories: vec![
                category(&format!("{d}_up"), RED, read_labels_where(&path, "monotonic", "up")?),
                category(
                    &format!("{d}_down"),
                    BLUE,
                    read_labels_where(&path, "monotonic", "down")?,
                ),
            ],
        });
    }
    for kind in ["revision", "triangle"] {
        let mut categories = Vec::new();
        for (d, color) in [(Direction::Cited, RED), (Direction::Citing, BLUE)] {
            let path = jdir.join(format!("{kind}_{d}.csv"));
            categories.push(category(
                &d.to_string(),
                color,
                read_labels_where(&path, "flagged", "1")?,
            ));
        }
        figures.push(OverlayFigure {
            name: kind.to_string(),
            categories,
        });
    }
    let components = connected_components(graph);
    let mut giant = BTreeSet::new();
    let mut rest = BTreeSet::new();
    for (v, &c) in components.assignment.iter().enumerate() {
        let set = if c == 0 { &mut giant } else { &mut rest };
        set.insert(graph.label(v).to_string());
    }
    figures.push(OverlayFigure {
        name: "hot_links".to_string(),
        categories: vec![
            category("giant", RED, giant),
            category("other_components", ORANGE, rest),
        ],
    });
    Ok(figures)
}

/// Runs the selected exporters over the graph stage's files into `export/`.
pub fn export(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let gdir = cfg.stage_dir(GRAPH_DIR);
    let net = gdir.join("hot_links.net");
    let clu = gdir.join("communities.clu");
    let graph = read_pajek_net(open_file(&net)?, &net)?;
    let communities = read_pajek_clu(open_file(&clu)?, &clu)?;
    if communities.len() != graph.node_count() {
        return Err(Error::MissingAssignment(communities.len()));
    }
    let components = connected_components(&graph);
    let basemap = cfg.basemap.as_deref().map(parse_basemap).transpose()?;
    let overlays = overlay_figures(cfg, &graph)?;
    let ctx = ExportContext {
        graph: &graph,
        communities: &communities,
        components: &components,
        basemap: basemap.as_ref(),
        overlays: &overlays,
        neutral_color: &cfg.neutral_color,
    };
    let dir = cfg.stage_dir(EXPORT_DIR);
    fresh_dir(&dir)?;
    let registry = exporters();
    let mut files = Vec::new();
    for name in &cfg.formats {
        files.extend(registry.get(name)?.export(&ctx, &dir)?);
    }
    Ok(files)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub data_summary: DataSummary,
    pub files: Vec<PathBuf>,
}

/// All five stages in order.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome> {
    let ingested = ingest(cfg)?;
    let mut files = ingested.files;
    files.extend(flag_journals(cfg)?);
    files.extend(flag_links(cfg)?);
    files.extend(graph(cfg)?);
    files.extend(export(cfg)?);
    Ok(RunOutcome {
        data_summary: ingested.data_summary,
        files,
    })
}

/// data summary of an earlier ingest.
pub fn ingested_data_summary(out: &Path) -> Result<DataSummary> {
    Ok(read_meta(out)?.data_summary)
}

/// Renders a file list relative to `root`, one per line.
pub fn describe_files(root: &Path, files: &[PathBuf]) -> String {
    let mut s = String::new();
    for f in files {
        let shown = f.strip_prefix(root).unwrap_or(f);
        let _ = writeln!(s, "{}", shown.display());
    }
    s
}
