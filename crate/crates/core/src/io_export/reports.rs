//! CSV rankings and JSON summaries.
//!
//! All CSV values are in the configured unit with six decimals; files use
//! LF line endings and a fixed row order so reruns are byte-identical.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, Terminator, WriterBuilder};
use serde_json::{json, Value};

use super::numfmt::dec6;
use super::write_file;
use crate::corpus::{JournalRegistry, NodeId, YearPair};
use crate::entropy::{Direction, Unit};
use crate::error::{Error, Result};
use crate::flags::{FlagReport, LinkFlags, ThresholdSpec};
use crate::netgraph::{degree_centrality, CommunityPartition, ComponentPartition, HotLinkGraph};

pub const FORMAT_VERSION: u32 = 1;

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::io("<csv>", io::Error::other(e))
}

/// JSON number rounded to six decimals.
fn num(x: f64) -> Value {
    dec6(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
}

fn threshold_json(t: &ThresholdSpec, unit: Unit) -> Value {
    json!({
        "k": t.k,
        "mean": num(unit.from_bits(t.mean)),
        "sd": num(unit.from_bits(t.sd)),
        "upper": num(unit.from_bits(t.upper)),
        "lower": num(unit.from_bits(t.lower)),
    })
}

fn pair_years(pair: YearPair, years: &[String]) -> String {
    let (a, b) = pair.years();
    format!("{}-{}", years[a], years[b])
}

/// Descriptive statistics per indicator (cf. the entropy summary table).
///
/// Columns: `indicator,years,cells,mean,sd_cited,sd_citing,sum`.
pub fn write_indicator_summary<W: Write>(report: &FlagReport, years: &[String], out: W) -> Result<()> {
    let u = report.settings.unit;
    let mut w = csv_writer(out);
    w.write_record(["indicator", "years", "cells", "mean", "sd_cited", "sd_citing", "sum"])
        .map_err(csv_err)?;
    for p in &report.pairs {
        w.write_record([
            "kl".to_string(),
            pair_years(p.pair, years),
            p.cells.to_string(),
            dec6(u.from_bits(p.margins.cited.mean)),
            dec6(u.from_bits(p.margins.cited.sd)),
            dec6(u.from_bits(p.margins.citing.sd)),
            dec6(u.from_bits(p.grand_sum)),
        ])
        .map_err(csv_err)?;
    }
    let span = years.join("-");
    let rev = &report.revision;
    w.write_record([
        "revision".to_string(),
        span.clone(),
        rev.cited.included_cells.to_string(),
        dec6(u.from_bits(rev.cited.mean)),
        dec6(u.from_bits(rev.cited.sd)),
        dec6(u.from_bits(rev.citing.sd)),
        dec6(u.from_bits(rev.cited.total)),
    ])
    .map_err(csv_err)?;
    let tm = &report.triangle_margins;
    w.write_record([
        "triangle".to_string(),
        span,
        report.triangle.values.len().to_string(),
        dec6(u.from_bits(tm.cited.mean)),
        dec6(u.from_bits(tm.cited.sd)),
        dec6(u.from_bits(tm.citing.sd)),
        dec6(u.from_bits(report.triangle.grand_sum)),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn ranked(values: &[f64], registry: &JournalRegistry, descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let by_value = values[a].total_cmp(&values[b]);
        let by_value = if descending { by_value.reverse() } else { by_value };
        by_value.then_with(|| registry.label(a as NodeId).cmp(registry.label(b as NodeId)))
    });
    order
}

/// Node margins of the three year pairs with monotonic flags, ranked by the
/// first-to-last pair, descending.
///
/// Columns: `rank,label,t0_t1,t1_t2,t0_t2,monotonic` (`up`, `down` or empty).
pub fn write_margin_ranking<W: Write>(
    report: &FlagReport,
    registry: &JournalRegistry,
    direction: Direction,
    out: W,
) -> Result<()> {
    let u = report.settings.unit;
    let m = |pair| &report.pair(pair).margins.get(direction).values;
    let (a, b, c) = (
        m(YearPair::FirstSecond),
        m(YearPair::SecondThird),
        m(YearPair::FirstThird),
    );
    let flags = report.monotonic.get(direction);
    let mut w = csv_writer(out);
    w.write_record(["rank", "label", "t0_t1", "t1_t2", "t0_t2", "monotonic"])
        .map_err(csv_err)?;
    for (rank, node) in ranked(c, registry, true).into_iter().enumerate() {
        let id = node as NodeId;
        let flag = if flags.up.contains(&id) {
            "up"
        } else if flags.down.contains(&id) {
            "down"
        } else {
            ""
        };
        w.write_record([
            (rank + 1).to_string(),
            registry.label(id).to_string(),
            dec6(u.from_bits(a[node])),
            dec6(u.from_bits(b[node])),
            dec6(u.from_bits(c[node])),
            flag.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn write_low_ranking<W: Write>(
    header: [&str; 4],
    values: &[f64],
    flagged: &BTreeSet<NodeId>,
    registry: &JournalRegistry,
    unit: Unit,
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for (rank, node) in ranked(values, registry, false).into_iter().enumerate() {
        let id = node as NodeId;
        w.write_record([
            (rank + 1).to_string(),
            registry.label(id).to_string(),
            dec6(unit.from_bits(values[node])),
            u8::from(flagged.contains(&id)).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Revision of the prediction per node, most negative first.
///
/// Columns: `rank,label,revision,flagged`.
pub fn write_revision_ranking<W: Write>(
    report: &FlagReport,
    registry: &JournalRegistry,
    direction: Direction,
    out: W,
) -> Result<()> {
    write_low_ranking(
        ["rank", "label", "revision", "flagged"],
        &report.revision.get(direction).values,
        &report.revision_flagged.get(direction).nodes,
        registry,
        report.settings.unit,
        out,
    )
}

/// Triangle-score margins per node, most negative first.
///
/// Columns: `rank,label,score,flagged`.
pub fn write_triangle_ranking<W: Write>(
    report: &FlagReport,
    registry: &JournalRegistry,
    direction: Direction,
    out: W,
) -> Result<()> {
    write_low_ranking(
        ["rank", "label", "score", "flagged"],
        &report.triangle_margins.get(direction).values,
        &report.triangle_flagged.get(direction).nodes,
        registry,
        report.settings.unit,
        out,
    )
}

/// Flagged links, most negative score first.
///
/// Columns: `citing,cited,score_<unit>`.
pub fn write_hot_links<W: Write>(links: &LinkFlags, registry: &JournalRegistry, unit: Unit, out: W) -> Result<()> {
    let mut sorted = links.links.clone();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.cell().cmp(&b.cell())));
    let mut w = csv_writer(out);
    w.write_record(["citing", "cited", &format!("score_{unit}")])
        .map_err(csv_err)?;
    for l in &sorted {
        w.write_record([
            registry.label(l.citing),
            registry.label(l.cited),
            &dec6(unit.from_bits(l.score)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Thresholds, counts and the run configuration.
pub fn summary_json(report: &FlagReport, registry: &JournalRegistry, years: &[String]) -> Value {
    let u = report.settings.unit;
    let pairs: Vec<Value> = report
        .pairs
        .iter()
        .map(|p| {
            json!({
                "years": pair_years(p.pair, years),
                "cells": p.cells,
                "sum": num(u.from_bits(p.grand_sum)),
                "mean": num(u.from_bits(p.margins.cited.mean)),
                "sd_cited": num(u.from_bits(p.margins.cited.sd)),
                "sd_citing": num(u.from_bits(p.margins.citing.sd)),
            })
        })
        .collect();
    let per_direction =
        |f: &dyn Fn(Direction) -> Value| json!({ "cited": f(Direction::Cited), "citing": f(Direction::Citing) });
    let monotonic = per_direction(&|d| {
        let m = report.monotonic.get(d);
        json!({
            "up": m.up.len(),
            "down": m.down.len(),
            "thresholds": m.thresholds.iter().map(|t| threshold_json(t, u)).collect::<Vec<_>>(),
        })
    });
    let revision = per_direction(&|d| {
        let r = report.revision.get(d);
        let f = report.revision_flagged.get(d);
        json!({
            "total": num(u.from_bits(r.total)),
            "excluded_cells": r.excluded_cells,
            "threshold": threshold_json(&f.threshold, u),
            "flagged": f.nodes.len(),
        })
    });
    let triangle_nodes = per_direction(&|d| {
        let f = report.triangle_flagged.get(d);
        json!({ "threshold": threshold_json(&f.threshold, u), "flagged": f.nodes.len() })
    });
    let h = &report.hot_links;
    json!({
        "format_version": FORMAT_VERSION,
        "unit": u.as_str(),
        "config": {
            "k": report.settings.k,
            "drop_loops": report.settings.drop_loops,
            "outliers_removed": report.settings.outliers_removed,
        },
        "years": years,
        "nodes": registry.len(),
        "pairs": pairs,
        "monotonic": monotonic,
        "revision": revision,
        "triangle_nodes": triangle_nodes,
        "hot_links": {
            "cells": report.triangle.values.len(),
            "sum": num(u.from_bits(report.triangle.grand_sum)),
            "threshold": threshold_json(&h.threshold, u),
            "flagged": h.links.len(),
            "loops_removed": h.loops_removed,
        },
    })
}

/// One row per component: `component,size,members` with members joined by `; `.
pub fn write_components<W: Write>(graph: &HotLinkGraph, components: &ComponentPartition, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["component", "size", "members"]).map_err(csv_err)?;
    for c in 0..components.len() {
        let members: Vec<&str> = components.members(c).into_iter().map(|v| graph.label(v)).collect();
        w.write_record([(c + 1).to_string(), components.sizes[c].to_string(), members.join("; ")])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Degree ranking: `rank,label,degree,component`.
pub fn write_degree<W: Write>(graph: &HotLinkGraph, components: &ComponentPartition, out: W) -> Result<()> {
    let degree = degree_centrality(graph);
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(graph.label(a).cmp(graph.label(b))));
    let mut w = csv_writer(out);
    w.write_record(["rank", "label", "degree", "component"])
        .map_err(csv_err)?;
    for (rank, v) in order.into_iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            graph.label(v).to_string(),
            degree[v].to_string(),
            (components.assignment[v] + 1).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Node memberships: `label,community,component`.
pub fn write_communities<W: Write>(
    graph: &HotLinkGraph,
    components: &ComponentPartition,
    communities: &CommunityPartition,
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["label", "community", "component"]).map_err(csv_err)?;
    for v in 0..graph.node_count() {
        w.write_record([
            graph.label(v).to_string(),
            (communities.assignment[v] + 1).to_string(),
            (components.assignment[v] + 1).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn graph_summary_json(
    graph: &HotLinkGraph,
    components: &ComponentPartition,
    communities: &CommunityPartition,
    detector: &str,
) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "components": components.len(),
        "component_sizes": components.sizes,
        "giant_component": components.sizes.first().copied().unwrap_or(0),
        "outside_giant": components.sizes.iter().skip(1).sum::<usize>(),
        "community_detector": detector,
        "seed": communities.seed,
        "communities": communities.community_count(),
        "modularity": num(communities.modularity),
        "level_modularity": communities.level_modularity.iter().map(|&q| num(q)).collect::<Vec<_>>(),
    })
}

pub(crate) fn write_json(path: &Path, value: &Value) -> Result<PathBuf> {
    write_file(path, |w| {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, io::Error::other(e)))?;
        writeln!(w, "{text}").map_err(|e| Error::io(path, e))
    })
}

/// Journal-level artifacts: the indicator table, margin, revision and
/// triangle rankings per direction, and `summary.json`.
pub fn write_journal_reports(
    dir: &Path,
    report: &FlagReport,
    registry: &JournalRegistry,
    years: &[String],
) -> Result<Vec<PathBuf>> {
    let mut out = vec![write_file(&dir.join("indicator_summary.csv"), |w| {
        write_indicator_summary(report, years, w)
    })?];
    for d in Direction::BOTH {
        out.push(write_file(&dir.join(format!("margins_{d}.csv")), |w| {
            write_margin_ranking(report, registry, d, w)
        })?);
        out.push(write_file(&dir.join(format!("revision_{d}.csv")), |w| {
            write_revision_ranking(report, registry, d, w)
        })?);
        out.push(write_file(&dir.join(format!("triangle_{d}.csv")), |w| {
            write_triangle_ranking(report, registry, d, w)
        })?);
    }
    out.push(write_json(
        &dir.join("summary.json"),
        &summary_json(report, registry, years),
    )?);
    Ok(out)
}

/// Link-level artifact: `hot_links.csv`.
pub fn write_link_reports(dir: &Path, report: &FlagReport, registry: &JournalRegistry) -> Result<Vec<PathBuf>> {
    Ok(vec![write_file(&dir.join("hot_links.csv"), |w| {
        write_hot_links(&report.hot_links, registry, report.settings.unit, w)
    })?])
}

/// Graph-level artifacts: components, degree ranking, community
/// memberships and `graph_summary.json`.
pub fn write_graph_reports(
    dir: &Path,
    graph: &HotLinkGraph,
    components: &ComponentPartition,
    communities: &CommunityPartition,
    detector: &str,
) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write_file(&dir.join("components.csv"), |w| write_components(graph, components, w))?,
        write_file(&dir.join("degree.csv"), |w| write_degree(graph, components, w))?,
        write_file(&dir.join("communities.csv"), |w| {
            write_communities(graph, components, communities, w)
        })?,
        write_json(
            &dir.join("graph_summary.json"),
            &graph_summary_json(graph, components, communities, detector),
        )?,
    ])
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(ReaderBuilder::new().from_reader(file))
}

fn parse_csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(path, line, e.to_string())
}

/// Reads `hot_links.csv` back as `(citing, cited, score in bits)`.
pub fn read_hot_links(path: &Path) -> Result<Vec<(String, String, f64)>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| parse_csv_err(path, e))?.clone();
    let unit: Unit = match (headers.get(0), headers.get(1), headers.get(2)) {
        (Some("citing"), Some("cited"), Some(score)) => score
            .strip_prefix("score_")
            .ok_or_else(|| Error::parse(path, 1, "third column must be score_<unit>"))?
            .parse()
            .map_err(|_| Error::parse(path, 1, format!("unknown unit in {score:?}")))?,
        _ => return Err(Error::parse(path, 1, "expected header citing,cited,score_<unit>")),
    };
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let score: f64 = record
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(path, line, "malformed score"))?;
        out.push((record[0].to_string(), record[1].to_string(), unit.to_bits(score)))
    }
    Ok(out)
}

/// Labels whose `column` equals `value` in a ranking CSV.
pub fn read_labels_where(path: &Path, column: &str, value: &str) -> Result<BTreeSet<String>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| parse_csv_err(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing column {name:?}")))
    };
    let (label_col, value_col) = (find("label")?, find(column)?);
    let mut out = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_csv_err(path, e))?;
        if record.get(value_col) == Some(value) {
            out.insert(record[label_col].to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags::{HotLink, ThresholdSpec};

    fn registry() -> JournalRegistry {
        JournalRegistry::new(
            ["A".to_string(), "B, Inc".to_string(), "C".to_string()],
            Default::default(),
        )
    }

    #[test]
    fn hot_links_layout_and_unit() {
        let links = LinkFlags {
            threshold: ThresholdSpec {
                k: 1.0,
                mean: 0.0,
                sd: 0.0,
                upper: 0.0,
                lower: 0.0,
            },
            drop_loops: true,
            loops_removed: 0,
            links: vec![
                HotLink {
                    citing: 0,
                    cited: 1,
                    score: -0.000_5,
                },
                HotLink {
                    citing: 2,
                    cited: 0,
                    score: -0.001_012,
                },
            ],
        };
        let mut buf = Vec::new();
        write_hot_links(&links, &registry(), Unit::Mbits, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "citing,cited,score_mbits\nC,A,-1.012000\nA,\"B, Inc\",-0.500000\n"
        );
    }

    #[test]
    fn component_listing() {
        let g = HotLinkGraph::from_labeled_links([("A", "B", -1.0), ("B", "C", -1.0), ("D", "E", -1.0)]);
        let c = crate::netgraph::connected_components(&g);
        let mut buf = Vec::new();
        write_components(&g, &c, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "component,size,members\n1,3,A; B; C\n2,2,D; E\n"
        );
    }
}
