//! Per-year citation matrices, name harmonization and the aligned
//! three-year tensor over the common actively-citing node set.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub type NodeId = u32;

/// A directed citation relation. Ordering is `(citing, cited)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link<K> {
    pub citing: K,
    pub cited: K,
}

pub type Cell = Link<NodeId>;

impl<K> Link<K> {
    pub fn new(citing: K, cited: K) -> Self {
        Link { citing, cited }
    }
}

impl<K: PartialEq> Link<K> {
    pub fn is_loop(&self) -> bool {
        self.citing == self.cited
    }
}

/// Trim leading/trailing ASCII whitespace and apply Unicode NFC.
pub fn normalize_name(name: &str) -> String {
    name.trim_matches(|c: char| c.is_ascii_whitespace()).nfc().collect()
}

/// Orders year labels numerically when every label is an integer,
/// lexicographically otherwise.
pub fn compare_year_labels(labels: &[&str]) -> impl Fn(&str, &str) -> Ordering {
    let numeric = labels.iter().all(|l| l.trim().parse::<i64>().is_ok());
    move |a: &str, b: &str| {
        if numeric {
            let (x, y) = (a.trim().parse::<i64>(), b.trim().parse::<i64>());
            if let (Ok(x), Ok(y)) = (x, y) {
                return x.cmp(&y);
            }
        }
        a.cmp(b)
    }
}

/// Sparse count matrix for one year. Zero cells are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearMatrix<K: Ord = NodeId> {
    label: String,
    cells: BTreeMap<Link<K>, u64>,
    citing_totals: BTreeMap<K, u64>,
    cited_totals: BTreeMap<K, u64>,
    grand_total: u64,
}

pub type NamedYearMatrix = YearMatrix<String>;

impl<K: Ord + Clone> YearMatrix<K> {
    /// Builds a matrix from records, summing duplicates and skipping zeros.
    pub fn from_records<I>(label: impl Into<String>, records: I) -> Self
    where
        I: IntoIterator<Item = (K, K, u64)>,
    {
        let mut cells = BTreeMap::new();
        for (citing, cited, count) in records {
            if count > 0 {
                *cells.entry(Link::new(citing, cited)).or_insert(0) += count;
            }
        }
        Self::from_cells(label, cells)
    }

    pub fn from_cells(label: impl Into<String>, mut cells: BTreeMap<Link<K>, u64>) -> Self {
        cells.retain(|_, c| *c > 0);
        let mut citing_totals = BTreeMap::new();
        let mut cited_totals = BTreeMap::new();
        let mut grand_total = 0u64;
        for (link, &count) in &cells {
            *citing_totals.entry(link.citing.clone()).or_insert(0) += count;
            *cited_totals.entry(link.cited.clone()).or_insert(0) += count;
            grand_total += count;
        }
        YearMatrix {
            label: label.into(),
            cells,
            citing_totals,
            cited_totals,
            grand_total,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cells(&self) -> &BTreeMap<Link<K>, u64> {
        &self.cells
    }

    pub fn count(&self, link: &Link<K>) -> u64 {
        self.cells.get(link).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Totals per node over the cells where it is the citing side.
    pub fn citing_totals(&self) -> &BTreeMap<K, u64> {
        &self.citing_totals
    }

    /// Totals per node over the cells where it is the cited side.
    pub fn cited_totals(&self) -> &BTreeMap<K, u64> {
        &self.cited_totals
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    /// All nodes that occur on either side of some cell.
    pub fn nodes(&self) -> BTreeSet<K> {
        self.citing_totals
            .keys()
            .chain(self.cited_totals.keys())
            .cloned()
            .collect()
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        Self::from_cells(
            self.label.clone(),
            self.cells.iter().map(|(l, c)| (l.clone(), c * factor)).collect(),
        )
    }
}

/// Parses a `citing<TAB>cited<TAB>count` edge list.
pub fn parse_edge_list(path: &Path, year_label: &str) -> Result<NamedYearMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_list(BufReader::new(file), path, year_label)
}

/// Reader form of [`parse_edge_list`]; `source` only labels error messages.
pub fn read_edge_list<R: BufRead>(reader: R, source: &Path, year_label: &str) -> Result<NamedYearMatrix> {
    let mut records = Vec::new();
    let mut seen_data = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if is_skippable(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let (citing, cited) = (normalize_name(fields[0]), normalize_name(fields[1]));
        let raw_count = fields[2].trim();
        if !seen_data && citing == "citing" && cited == "cited" && raw_count == "count" {
            seen_data = true;
            continue;
        }
        seen_data = true;
        if citing.is_empty() || cited.is_empty() {
            return Err(Error::parse(source, lineno, "empty node name"));
        }
        let count = parse_count(raw_count).map_err(|m| Error::parse(source, lineno, m))?;
        records.push((citing, cited, count));
    }
    Ok(YearMatrix::from_records(year_label, records))
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim_matches(|c: char| c.is_ascii_whitespace());
    t.is_empty() || t.starts_with('#')
}

fn parse_count(raw: &str) -> std::result::Result<u64, String> {
    match raw.parse::<u64>() {
        Ok(0) => Err("count must be positive, found 0".into()),
        Ok(c) => Ok(c),
        Err(_) => match raw.parse::<i128>() {
            Ok(v) if v <= 0 => Err(format!("count must be positive, found {v}")),
            _ => Err(format!("malformed count {raw:?}")),
        },
    }
}

/// Parses an `old_name<TAB>new_name` rename table.
pub fn parse_renames(path: &Path) -> Result<Vec<(String, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_renames(BufReader::new(file), path)
}

pub fn read_renames<R: BufRead>(reader: R, source: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut seen_data = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if is_skippable(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        }
        let (old, new) = (normalize_name(fields[0]), normalize_name(fields[1]));
        if !seen_data && old == "old_name" && new == "new_name" {
            seen_data = true;
            continue;
        }
        seen_data = true;
        if old.is_empty() || new.is_empty() {
            return Err(Error::parse(source, lineno, "empty node name"));
        }
        out.push((old, new));
    }
    Ok(out)
}

/// Canonical node identities. Ids are dense and follow the lexicographic
/// order of canonical names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JournalRegistry {
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    aliases: BTreeMap<String, String>,
}

impl JournalRegistry {
    pub fn new<I: IntoIterator<Item = String>>(names: I, aliases: BTreeMap<String, String>) -> Self {
        let names: BTreeSet<String> = names.into_iter().collect();
        let names: Vec<String> = names.into_iter().collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as NodeId))
            .collect();
        JournalRegistry { names, index, aliases }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.names[id as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.names
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    /// Resolves any historical or canonical name to its canonical form.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        let name = normalize_name(name);
        let canonical = self.aliases.get(&name).unwrap_or(&name);
        self.index.get_key_value(canonical.as_str()).map(|(k, _)| k.as_str())
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.resolve(name).and_then(|c| self.index.get(c).copied())
    }

    /// Registry over the retained ids, plus the old→new id map.
    fn restrict(&self, keep: &BTreeSet<NodeId>) -> (JournalRegistry, Vec<Option<NodeId>>) {
        let mut remap = vec![None; self.names.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old as usize] = Some(new as NodeId);
        }
        let names: Vec<String> = keep.iter().map(|&id| self.names[id as usize].clone()).collect();
        let retained: BTreeSet<&String> = names.iter().collect();
        let aliases = self
            .aliases
            .iter()
            .filter(|(_, to)| retained.contains(to))
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        (JournalRegistry::new(names, aliases), remap)
    }
}

/// Transitive closure of the rename relation: old name → terminal name.
pub fn resolve_renames(renames: &[(String, String)]) -> Result<BTreeMap<String, String>> {
    let mut direct: BTreeMap<String, String> = BTreeMap::new();
    for (old, new) in renames {
        let (old, new) = (normalize_name(old), normalize_name(new));
        if old == new {
            log::warn!("ignoring rename of {old:?} to itself");
            continue;
        }
        match direct.get(&old) {
            Some(prev) if *prev != new => {
                let (first, second) = if *prev < new {
                    (prev.clone(), new)
                } else {
                    (new, prev.clone())
                };
                return Err(Error::ConflictingRename { old, first, second });
            }
            Some(_) => {}
            None => {
                direct.insert(old, new);
            }
        }
    }

    let mut closure = BTreeMap::new();
    for start in direct.keys() {
        let mut chain = vec![start.clone()];
        let mut current = start;
        while let Some(next) = direct.get(current) {
            if chain.contains(next) {
                chain.push(next.clone());
                let begin = chain.iter().position(|n| n == next).unwrap_or(0);
                return Err(Error::RenameCycle(chain[begin..].to_vec()));
            }
            chain.push(next.clone());
            current = next;
        }
        closure.insert(start.clone(), current.clone());
    }
    Ok(closure)
}

/// Number of distinct names in a raw year that are subject to a rename.
pub fn count_renamed(matrix: &NamedYearMatrix, aliases: &BTreeMap<String, String>) -> usize {
    matrix.nodes().iter().filter(|n| aliases.contains_key(*n)).count()
}

/// Replaces every historical name by its terminal name, summing cells that
/// collide, and assigns canonical ids over the union of names.
pub fn apply_name_changes(
    matrices: Vec<NamedYearMatrix>,
    renames: &[(String, String)],
) -> Result<(JournalRegistry, Vec<YearMatrix>)> {
    let aliases = resolve_renames(renames)?;
    let canon = |n: &String| aliases.get(n).unwrap_or(n).clone();

    let renamed: Vec<NamedYearMatrix> = matrices
        .iter()
        .map(|m| {
            YearMatrix::from_records(
                m.label(),
                m.cells().iter().map(|(l, &c)| (canon(&l.citing), canon(&l.cited), c)),
            )
        })
        .collect();

    let names: BTreeSet<String> = renamed.iter().flat_map(|m| m.nodes()).collect();
    let registry = JournalRegistry::new(names, aliases);
    let out = renamed
        .iter()
        .map(|m| {
            YearMatrix::from_records(
                m.label(),
                m.cells()
                    .iter()
                    .map(|(l, &c)| (registry.index[&l.citing], registry.index[&l.cited], c)),
            )
        })
        .collect();
    Ok((registry, out))
}

/// Index of a year pair inside the tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum YearPair {
    FirstSecond,
    SecondThird,
    FirstThird,
}

impl YearPair {
    pub const ALL: [YearPair; 3] = [YearPair::FirstSecond, YearPair::SecondThird, YearPair::FirstThird];

    /// (prior, posterior) year indices.
    pub fn years(self) -> (usize, usize) {
        match self {
            YearPair::FirstSecond => (0, 1),
            YearPair::SecondThird => (1, 2),
            YearPair::FirstThird => (0, 2),
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            YearPair::FirstSecond => "t0→t1",
            YearPair::SecondThird => "t1→t2",
            YearPair::FirstThird => "t0→t2",
        }
    }
}

/// Per-year counts before common-set restriction.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct YearStats {
    pub label: String,
    pub nodes: usize,
    pub links: usize,
    /// Nodes that are cited in the year but never cite.
    pub cited_only: usize,
    /// Links among the retained common node set.
    pub common_links: usize,
}

/// Three year-aligned matrices over one node set, plus transition masks.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTensor {
    registry: JournalRegistry,
    years: [YearMatrix; 3],
    pair_valid: [BTreeSet<Cell>; 3],
    tri_valid: BTreeSet<Cell>,
    input_stats: Vec<YearStats>,
    input_nodes: usize,
}

impl AlignedTensor {
    /// Builds masks over matrices that already share `registry`'s id space.
    pub(crate) fn from_parts(
        registry: JournalRegistry,
        years: [YearMatrix; 3],
        input_stats: Vec<YearStats>,
        input_nodes: usize,
    ) -> Self {
        let pair_valid = YearPair::ALL.map(|pair| {
            let (prior, _) = pair.years();
            years[prior].cells().keys().copied().collect::<BTreeSet<Cell>>()
        });
        let tri_valid = years[0]
            .cells()
            .keys()
            .filter(|c| years[1].count(c) > 0 && years[2].count(c) > 0)
            .copied()
            .collect();
        AlignedTensor {
            registry,
            years,
            pair_valid,
            tri_valid,
            input_stats,
            input_nodes,
        }
    }

    pub fn registry(&self) -> &JournalRegistry {
        &self.registry
    }

    pub fn node_count(&self) -> usize {
        self.registry.len()
    }

    pub fn years(&self) -> &[YearMatrix; 3] {
        &self.years
    }

    pub fn year(&self, index: usize) -> &YearMatrix {
        &self.years[index]
    }

    pub fn pair_valid(&self, pair: YearPair) -> &BTreeSet<Cell> {
        &self.pair_valid[pair.index()]
    }

    pub fn tri_valid(&self) -> &BTreeSet<Cell> {
        &self.tri_valid
    }

    pub fn frequencies(&self, year: usize) -> Result<Frequencies> {
        relative_frequencies(&self.years[year])
    }

    /// Year statistics of the inputs this tensor was built from.
    pub fn input_stats(&self) -> &[YearStats] {
        &self.input_stats
    }

    /// Number of distinct canonical nodes across the input years.
    pub fn input_nodes(&self) -> usize {
        self.input_nodes
    }

    /// Named copy of one year, for caching and re-ingestion.
    pub fn named_year(&self, index: usize) -> NamedYearMatrix {
        let m = &self.years[index];
        YearMatrix::from_records(
            m.label(),
            m.cells().iter().map(|(l, &c)| {
                (
                    self.registry.label(l.citing).to_string(),
                    self.registry.label(l.cited).to_string(),
                    c,
                )
            }),
        )
    }

    /// Deletes the given nodes' rows and columns. Counts of the remaining
    /// cells are untouched; frequencies renormalize over the reduced totals.
    pub(crate) fn without_nodes(&self, drop: &BTreeSet<NodeId>) -> AlignedTensor {
        let keep: BTreeSet<NodeId> = (0..self.node_count() as NodeId)
            .filter(|id| !drop.contains(id))
            .collect();
        let (registry, remap) = self.registry.restrict(&keep);
        let years = self.years.clone().map(|m| reindex(&m, &remap));
        AlignedTensor::from_parts(registry, years, self.input_stats.clone(), self.input_nodes)
    }
}

fn reindex(m: &YearMatrix, remap: &[Option<NodeId>]) -> YearMatrix {
    YearMatrix::from_records(
        m.label(),
        m.cells().iter().filter_map(|(l, &c)| {
            let citing = remap[l.citing as usize]?;
            let cited = remap[l.cited as usize]?;
            Some((citing, cited, c))
        }),
    )
}

/// Restricts three harmonized years to the nodes that cite at least once in
/// every year, dropping their rows and columns everywhere.
pub fn build_common_set(registry: &JournalRegistry, matrices: Vec<YearMatrix>) -> Result<AlignedTensor> {
    let matrices: [YearMatrix; 3] = matrices
        .try_into()
        .map_err(|v: Vec<YearMatrix>| Error::YearCount(v.len()))?;
    let labels: Vec<&str> = matrices.iter().map(|m| m.label()).collect();
    let cmp = compare_year_labels(&labels);
    if labels.windows(2).any(|w| cmp(w[0], w[1]) != Ordering::Less) {
        return Err(Error::YearOrder(labels.iter().map(|s| s.to_string()).collect()));
    }

    let mut active: Option<BTreeSet<NodeId>> = None;
    for m in &matrices {
        let citing: BTreeSet<NodeId> = m.citing_totals().keys().copied().collect();
        active = Some(match active {
            None => citing,
            Some(a) => a.intersection(&citing).copied().collect(),
        });
    }
    let active = active.unwrap_or_default();
    if active.is_empty() {
        return Err(Error::EmptyIntersection);
    }

    let (restricted, remap) = registry.restrict(&active);
    let mut input_stats: Vec<YearStats> = matrices
        .iter()
        .map(|m| {
            let nodes = m.nodes();
            let cited_only = nodes.iter().filter(|n| !m.citing_totals().contains_key(n)).count();
            YearStats {
                label: m.label().to_string(),
                nodes: nodes.len(),
                links: m.len(),
                cited_only,
                common_links: 0,
            }
        })
        .collect();
    let input_nodes = matrices.iter().flat_map(|m| m.nodes()).collect::<BTreeSet<_>>().len();
    let years = matrices.map(|m| reindex(&m, &remap));
    for (stats, m) in input_stats.iter_mut().zip(&years) {
        stats.common_links = m.len();
    }
    Ok(AlignedTensor::from_parts(restricted, years, input_stats, input_nodes))
}

/// Relative frequency of each stored cell: count / grand total.
pub type Frequencies = BTreeMap<Cell, f64>;

pub fn relative_frequencies(matrix: &YearMatrix) -> Result<Frequencies> {
    let total = matrix.grand_total();
    if total == 0 {
        return Err(Error::EmptyMatrix(matrix.label().to_string()));
    }
    let total = total as f64;
    Ok(matrix
        .cells()
        .iter()
        .map(|(cell, &count)| (*cell, count as f64 / total))
        .collect())
}
