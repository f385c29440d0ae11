//! VOSviewer map and network text files.
//!
//! Map file: tab-separated with header `id label x y cluster weight`; the
//! `x`/`y` columns are present only when a base map supplies coordinates,
//! otherwise VOSviewer computes its own layout. `weight` is the node degree.
//! Network file: headerless `id1<TAB>id2<TAB>weight` lines.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::path::Path;

use super::numfmt::sig6;
use super::overlay::BaseMap;
use crate::error::{Error, Result};
use crate::netgraph::{degree_centrality, HotLinkGraph};

/// Writes both files and returns the labels missing from the base map.
/// Unmatched nodes get empty coordinates.
pub fn write_vosviewer_files<M: Write, N: Write>(
    graph: &HotLinkGraph,
    clusters: &[usize],
    basemap: Option<&BaseMap>,
    map_out: &mut M,
    network_out: &mut N,
) -> Result<Vec<String>> {
    if clusters.len() != graph.node_count() {
        return Err(Error::MissingAssignment(clusters.len()));
    }
    let io_err = |e: io::Error| Error::io("<vosviewer>", e);
    let degree = degree_centrality(graph);
    let mut unmatched = Vec::new();

    let header = if basemap.is_some() {
        "id\tlabel\tx\ty\tcluster\tweight"
    } else {
        "id\tlabel\tcluster\tweight"
    };
    writeln!(map_out, "{header}").map_err(io_err)?;
    for (i, label) in graph.labels().iter().enumerate() {
        let tail = format!("{}\t{}", clusters[i] + 1, degree[i]);
        match basemap {
            Some(map) => {
                let (x, y) = match map.get(label) {
                    Some(row) => (row.x.as_str(), row.y.as_str()),
                    None => {
                        unmatched.push(label.clone());
                        ("", "")
                    }
                };
                writeln!(map_out, "{}\t{label}\t{x}\t{y}\t{tail}", i + 1)
            }
            None => writeln!(map_out, "{}\t{label}\t{tail}", i + 1),
        }
        .map_err(io_err)?;
    }
    for e in graph.edges() {
        writeln!(network_out, "{}\t{}\t{}", e.a + 1, e.b + 1, sig6(e.weight)).map_err(io_err)?;
    }
    Ok(unmatched)
}

/// Contents of a map/network file pair.
#[derive(Debug, Clone, PartialEq)]
pub struct VosNetwork {
    pub graph: HotLinkGraph,
    pub clusters: Vec<usize>,
    /// Verbatim coordinates per node when the map has `x`/`y` columns.
    pub coordinates: Option<Vec<Option<(String, String)>>>,
}

pub fn read_vosviewer_files<M: BufRead, N: BufRead>(
    map_in: M,
    map_source: &Path,
    network_in: N,
    network_source: &Path,
) -> Result<VosNetwork> {
    let mut lines = map_in.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(h))) => h,
        Some((_, Err(e))) => return Err(Error::io(map_source, e)),
        None => return Err(Error::parse(map_source, 1, "missing header")),
    };
    let columns: Vec<&str> = header.split('\t').map(str::trim).collect();
    let col = |name: &str| columns.iter().position(|c| c.eq_ignore_ascii_case(name));
    let (id_col, label_col, cluster_col) = match (col("id"), col("label"), col("cluster")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::parse(map_source, 1, "header must name id, label and cluster")),
    };
    let xy = col("x").zip(col("y"));

    let mut labels = Vec::new();
    let mut clusters = Vec::new();
    let mut coords = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(map_source, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |c: usize| fields.get(c).copied().unwrap_or("");
        if get(id_col).parse::<usize>().ok() != Some(labels.len() + 1) {
            return Err(Error::parse(map_source, lineno, "ids must be numbered 1..N in order"));
        }
        let cluster = match get(cluster_col).parse::<usize>() {
            Ok(c) if c >= 1 => c - 1,
            _ => return Err(Error::parse(map_source, lineno, "malformed cluster")),
        };
        labels.push(get(label_col).to_string());
        clusters.push(cluster);
        if let Some((x, y)) = xy {
            let (x, y) = (get(x), get(y));
            coords.push((!x.is_empty() || !y.is_empty()).then(|| (x.to_string(), y.to_string())));
        }
    }

    let n = labels.len();
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, line) in network_in.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(network_source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let idx = |s: &str| match s.parse::<usize>() {
            Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
            _ => Err(Error::parse(network_source, lineno, format!("id {s:?} out of range"))),
        };
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::parse(network_source, lineno, "expected id1, id2 and weight"));
        }
        let (a, b) = (idx(parts[0])?, idx(parts[1])?);
        let w = match parts.get(2) {
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|_| Error::parse(network_source, lineno, format!("malformed weight {raw:?}")))?,
            None => 1.0,
        };
        *edges.entry((a, b)).or_insert(0.0) += w;
    }
    let graph = HotLinkGraph::from_parts(labels, edges.into_iter().map(|((a, b), w)| (a, b, w)))?;
    Ok(VosNetwork {
        graph,
        clusters,
        coordinates: xy.map(|_| coords),
    })
}
