//! Undirected graph of flagged links, its components and communities.

mod louvain;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::corpus::JournalRegistry;
use crate::error::{Error, Result};
use crate::flags::HotLink;
use crate::strategy::{Named, Registry};

pub use louvain::louvain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    /// Smaller endpoint index.
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Simple undirected weighted graph without loops or isolated nodes.
/// Node order is the order of `labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct HotLinkGraph {
    labels: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl HotLinkGraph {
    pub fn empty() -> Self {
        HotLinkGraph {
            labels: Vec::new(),
            edges: Vec::new(),
            adjacency: Vec::new(),
        }
    }

    /// Builds a graph from node labels and undirected edges. Parallel edges
    /// are merged by summing their weights.
    pub fn from_parts(labels: Vec<String>, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let n = labels.len();
        if labels.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Graph("duplicate node label".into()));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::Graph(format!("self-loop on node {u}")));
            }
            if !w.is_finite() {
                return Err(Error::Graph(format!("non-finite weight on edge ({u}, {v})")));
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((a, b), weight)| Edge { a, b, weight })
            .collect();
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.a].push((e.b, e.weight));
            adjacency[e.b].push((e.a, e.weight));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(v, _)| v);
        }
        if let Some(i) = adjacency.iter().position(Vec::is_empty) {
            return Err(Error::Graph(format!("isolated node {:?}", labels[i])));
        }
        Ok(HotLinkGraph {
            labels,
            edges,
            adjacency,
        })
    }

    /// Graph over labeled directed links with signed scores. Loops are
    /// skipped; both directions of a pair collapse into one edge whose
    /// weight is the sum of absolute scores.
    pub fn from_labeled_links<I, S>(links: I) -> Self
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: Into<String>,
    {
        let links: Vec<(String, String, f64)> = links
            .into_iter()
            .map(|(a, b, s)| (a.into(), b.into(), s))
            .filter(|(a, b, _)| a != b)
            .collect();
        let labels: BTreeSet<&String> = links.iter().flat_map(|(a, b, _)| [a, b]).collect();
        let index: BTreeMap<&String, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let edges: Vec<(usize, usize, f64)> = links.iter().map(|(a, b, s)| (index[a], index[b], s.abs())).collect();
        let labels = labels.into_iter().cloned().collect();
        Self::from_parts(labels, edges).expect("labeled links always form a valid graph")
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `node` in ascending index order, with edge weights.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn total_weight(&self) -> f64 {
        crate::numeric::compensated_sum(self.edges.iter().map(|e| e.weight))
    }

    /// Induced subgraph on `nodes`, keeping their relative order.
    pub fn subgraph(&self, nodes: &[usize]) -> Result<HotLinkGraph> {
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let index: BTreeMap<usize, usize> = sorted.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let labels = sorted.iter().map(|&v| self.labels[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| Some((*index.get(&e.a)?, *index.get(&e.b)?, e.weight)));
        Self::from_parts(labels, edges.collect::<Vec<_>>())
    }
}

/// Graph of hot links; node labels come from the registry, so node order
/// equals ascending canonical id.
pub fn build_graph(hot_links: &[HotLink], registry: &JournalRegistry) -> HotLinkGraph {
    HotLinkGraph::from_labeled_links(hot_links.iter().map(|l| {
        (
            registry.label(l.citing).to_string(),
            registry.label(l.cited).to_string(),
            l.score,
        )
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentPartition {
    /// Component index per node; component 0 is the largest.
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn members(&self, component: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == component)
            .collect()
    }
}

/// Connected components ordered by size (descending), ties broken by the
/// smallest member index.
pub fn connected_components(graph: &HotLinkGraph) -> ComponentPartition {
    let n = graph.node_count();
    let mut raw = vec![usize::MAX; n];
    let mut found: Vec<(usize, usize)> = Vec::new(); // (size, first member)
    let mut queue = VecDeque::new();
    for start in 0..n {
        if raw[start] != usize::MAX {
            continue;
        }
        let id = found.len();
        raw[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &(u, _) in graph.neighbors(v) {
                if raw[u] == usize::MAX {
                    raw[u] = id;
                    queue.push_back(u);
                }
            }
        }
        found.push((size, start));
    }
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&x, &y| found[y].0.cmp(&found[x].0).then(found[x].1.cmp(&found[y].1)));
    let mut rank = vec![0; found.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    ComponentPartition {
        assignment: raw.iter().map(|&c| rank[c]).collect(),
        sizes: order.iter().map(|&c| found[c].0).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityPartition {
    /// Community index per node, numbered by first occurrence in node order.
    pub assignment: Vec<usize>,
    pub modularity: f64,
    /// Modularity after each accepted aggregation level, starting from the
    /// all-singletons partition.
    pub level_modularity: Vec<f64>,
    pub seed: u64,
}

impl CommunityPartition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }
}

/// Renumbers labels so that ids appear in increasing order of first use.
pub(crate) fn canonical_labels(assignment: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    assignment
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Newman–Girvan modularity of a weighted partition:
/// `Σ_c [e_c/m − (d_c/2m)²]`.
pub fn modularity(graph: &HotLinkGraph, assignment: &[usize]) -> Result<f64> {
    let n = graph.node_count();
    if assignment.len() < n {
        return Err(Error::MissingAssignment(assignment.len()));
    }
    let m = graph.total_weight();
    if m == 0.0 {
        return Ok(0.0);
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for e in graph.edges() {
        let (ca, cb) = (assignment[e.a], assignment[e.b]);
        if ca == cb {
            *internal.entry(ca).or_insert(0.0) += e.weight;
        }
        *degree.entry(ca).or_insert(0.0) += e.weight;
        *degree.entry(cb).or_insert(0.0) += e.weight;
    }
    let q = degree.iter().map(|(c, &d)| {
        let e = internal.get(c).copied().unwrap_or(0.0);
        e / m - (d / (2.0 * m)).powi(2)
    });
    Ok(crate::numeric::compensated_sum(q))
}

/// Unweighted degree of every node.
pub fn degree_centrality(graph: &HotLinkGraph) -> Vec<usize> {
    (0..graph.node_count()).map(|v| graph.neighbors(v).len()).collect()
}

/// A community-detection strategy selectable by name.
pub trait CommunityDetector: Named + Send + Sync {
    fn detect(&self, graph: &HotLinkGraph, seed: u64) -> CommunityPartition;
}

/// Multilevel modularity optimization.
pub struct Louvain;

impl Named for Louvain {
    fn name(&self) -> &'static str {
        "louvain"
    }
    fn description(&self) -> &'static str {
        "multilevel modularity optimization with seeded visit order"
    }
}

impl CommunityDetector for Louvain {
    fn detect(&self, graph: &HotLinkGraph, seed: u64) -> CommunityPartition {
        louvain(graph, seed)
    }
}

/// Each connected component is one community.
pub struct ComponentCommunities;

impl Named for ComponentCommunities {
    fn name(&self) -> &'static str {
        "components"
    }
    fn description(&self) -> &'static str {
        "one community per connected component"
    }
}

impl CommunityDetector for ComponentCommunities {
    fn detect(&self, graph: &HotLinkGraph, seed: u64) -> CommunityPartition {
        let assignment = canonical_labels(&connected_components(graph).assignment);
        let q = modularity(graph, &assignment).unwrap_or(0.0);
        CommunityPartition {
            assignment,
            modularity: q,
            level_modularity: vec![q],
            seed,
        }
    }
}

pub fn community_detectors() -> Registry<dyn CommunityDetector> {
    let mut reg: Registry<dyn CommunityDetector> = Registry::new("community detector");
    reg.register(Box::new(Louvain)).register(Box::new(ComponentCommunities));
    reg
}
