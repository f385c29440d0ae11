//! Base maps with fixed coordinates, and flag overlays projected onto them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::corpus::normalize_name;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMapRow {
    pub label: String,
    /// Coordinates are kept verbatim so they pass through unchanged.
    pub x: String,
    pub y: String,
    pub cluster: Option<String>,
    pub weight: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMap {
    rows: Vec<BaseMapRow>,
    has_cluster: bool,
    has_weight: bool,
    index: BTreeMap<String, usize>,
}

impl BaseMap {
    pub fn from_rows(rows: Vec<BaseMapRow>) -> Result<Self> {
        let has_cluster = rows.iter().any(|r| r.cluster.is_some());
        let has_weight = rows.iter().any(|r| r.weight.is_some());
        let mut index = BTreeMap::new();
        for (i, row) in rows.iter().enumerate() {
            if index.insert(normalize_name(&row.label), i).is_some() {
                return Err(Error::Config(format!("duplicate base map label {:?}", row.label)));
            }
        }
        Ok(BaseMap {
            rows,
            has_cluster,
            has_weight,
            index,
        })
    }

    pub fn rows(&self) -> &[BaseMapRow] {
        &self.rows
    }

    pub fn get(&self, label: &str) -> Option<&BaseMapRow> {
        self.index.get(&normalize_name(label)).map(|&i| &self.rows[i])
    }

    pub fn contains(&self, label: &str) -> bool {
        self.get(label).is_some()
    }

    fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["label", "x", "y"];
        if self.has_cluster {
            h.push("cluster");
        }
        if self.has_weight {
            h.push("weight");
        }
        h
    }

    fn fields<'a>(&self, row: &'a BaseMapRow) -> Vec<&'a str> {
        let mut f = vec![row.label.as_str(), row.x.as_str(), row.y.as_str()];
        if self.has_cluster {
            f.push(row.cluster.as_deref().unwrap_or(""));
        }
        if self.has_weight {
            f.push(row.weight.as_deref().unwrap_or(""));
        }
        f
    }
}

pub fn parse_basemap(path: &Path) -> Result<BaseMap> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_basemap(BufReader::new(file), path)
}

/// Tab-separated with a header naming at least `label`, `x` and `y`;
/// `cluster` and `weight` are optional, other columns are ignored.
pub fn read_basemap<R: BufRead>(input: R, source: &Path) -> Result<BaseMap> {
    let mut lines = input.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::parse(source, 1, "missing header")),
            Some((_, Err(e))) => return Err(Error::io(source, e)),
            Some((_, Ok(l))) if l.trim().is_empty() || l.starts_with('#') => continue,
            Some((i, Ok(l))) => break (i + 1, l),
        }
    };
    let columns: Vec<String> = header.1.split('\t').map(|c| c.trim().to_ascii_lowercase()).collect();
    let col = |name: &str| columns.iter().position(|c| c == name);
    let (label, x, y) = match (col("label"), col("x"), col("y")) {
        (Some(l), Some(x), Some(y)) => (l, x, y),
        _ => {
            return Err(Error::parse(
                source,
                header.0,
                "header must name label, x and y columns",
            ))
        }
    };
    let (cluster, weight) = (col("cluster"), col("weight"));

    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |c: usize| fields.get(c).map(|s| s.trim()).unwrap_or("");
        for (name, c) in [("x", x), ("y", y)] {
            if get(c).parse::<f64>().is_err() {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("malformed {name} coordinate {:?}", get(c)),
                ));
            }
        }
        let optional = |c: Option<usize>| c.map(get).filter(|s| !s.is_empty()).map(str::to_string);
        rows.push(BaseMapRow {
            label: normalize_name(get(label)),
            x: get(x).to_string(),
            y: get(y).to_string(),
            cluster: optional(cluster),
            weight: optional(weight),
        });
    }
    BaseMap::from_rows(rows)
}

/// One colored class of flagged nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayCategory {
    pub name: String,
    pub color: String,
    pub labels: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OverlayOutcome {
    /// Rows colored per category.
    pub colored: BTreeMap<String, usize>,
    /// Flagged labels absent from the base map.
    pub unmatched: Vec<String>,
}

pub const NEUTRAL_CATEGORY: &str = "none";

/// Base map rows plus `category` and `color` columns. A node flagged in
/// several categories takes the first one listed.
pub fn write_overlay<W: Write>(
    categories: &[OverlayCategory],
    map: &BaseMap,
    neutral_color: &str,
    out: &mut W,
) -> Result<OverlayOutcome> {
    let io_err = |e: io::Error| Error::io("<overlay>", e);
    let mut outcome = OverlayOutcome::default();
    for c in categories {
        outcome.colored.insert(c.name.clone(), 0);
    }
    let normalized: Vec<BTreeSet<String>> = categories
        .iter()
        .map(|c| c.labels.iter().map(|l| normalize_name(l)).collect())
        .collect();

    let mut header = map.header();
    header.extend(["category", "color"]);
    writeln!(out, "{}", header.join("\t")).map_err(io_err)?;
    for row in map.rows() {
        let key = normalize_name(&row.label);
        let hit = normalized.iter().position(|set| set.contains(&key));
        let (name, color) = match hit {
            Some(i) => {
                *outcome.colored.entry(categories[i].name.clone()).or_insert(0) += 1;
                (categories[i].name.as_str(), categories[i].color.as_str())
            }
            None => (NEUTRAL_CATEGORY, neutral_color),
        };
        let mut fields = map.fields(row);
        fields.extend([name, color]);
        writeln!(out, "{}", fields.join("\t")).map_err(io_err)?;
    }

    let unmatched: BTreeSet<&String> = categories
        .iter()
        .flat_map(|c| c.labels.iter())
        .filter(|l| !map.contains(l))
        .collect();
    outcome.unmatched = unmatched.into_iter().cloned().collect();
    Ok(outcome)
}
