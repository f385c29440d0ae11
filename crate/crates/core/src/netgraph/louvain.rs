//! Multilevel (Louvain) modularity optimization.
//!
//! Each level moves single nodes to the neighbouring community with the
//! largest modularity gain until no move helps, then collapses communities
//! into super-nodes. Visit order is a seeded shuffle; ties between equally
//! good target communities go to the lowest community id. The whole
//! multilevel pass is then repeated, starting from its own result, until a
//! pass gains nothing. A final step splits any community that is not
//! internally connected, which never lowers modularity.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{canonical_labels, modularity, CommunityPartition, HotLinkGraph};

/// Minimum modularity improvement for a level to be accepted.
const LEVEL_TOLERANCE: f64 = 1e-9;
/// Minimum gain (in edge-weight units) for a single node move.
const MOVE_TOLERANCE: f64 = 1e-12;
const MAX_PASSES: usize = 1_000;

/// Weighted graph with self-loops, used for the aggregated levels.
struct LevelGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    total_weight: f64,
}

impl LevelGraph {
    fn from_graph(graph: &HotLinkGraph) -> Self {
        let n = graph.node_count();
        let adjacency: Vec<Vec<(usize, f64)>> = (0..n).map(|v| graph.neighbors(v).to_vec()).collect();
        Self::with_parts(adjacency, vec![0.0; n])
    }

    fn with_parts(adjacency: Vec<Vec<(usize, f64)>>, self_loops: Vec<f64>) -> Self {
        let degree: Vec<f64> = adjacency
            .iter()
            .zip(&self_loops)
            .map(|(adj, &l)| adj.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * l)
            .collect();
        let total_weight = degree.iter().sum::<f64>() / 2.0;
        LevelGraph {
            adjacency,
            self_loops,
            degree,
            total_weight,
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    /// Local moving phase. Returns the dense community index per node and
    /// whether any node changed community.
    fn local_moves(&self, initial: &[usize], rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community = initial.to_vec();
        let mut totals = vec![0.0; n];
        for (v, &c) in community.iter().enumerate() {
            totals[c] += self.degree[v];
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let two_m = 2.0 * self.total_weight;
        let mut moved_any = false;

        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for &node in &order {
                let current = community[node];
                let k = self.degree[node];
                let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                for &(nb, w) in &self.adjacency[node] {
                    *links.entry(community[nb]).or_insert(0.0) += w;
                }
                totals[current] -= k;

                let gain = |c: usize, w: f64| w - totals[c] * k / two_m;
                let mut best = current;
                let mut best_gain = gain(current, links.get(&current).copied().unwrap_or(0.0));
                for (&c, &w) in &links {
                    if c == current {
                        continue;
                    }
                    let g = gain(c, w);
                    if g > best_gain + MOVE_TOLERANCE {
                        best = c;
                        best_gain = g;
                    }
                }

                totals[best] += k;
                if best != current {
                    community[node] = best;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        (canonical_labels(&community), moved_any)
    }

    /// Collapses each community into one node.
    fn aggregate(&self, community: &[usize]) -> LevelGraph {
        let count = community.iter().max().map_or(0, |m| m + 1);
        let mut self_loops = vec![0.0; count];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        for v in 0..self.len() {
            let cv = community[v];
            self_loops[cv] += self.self_loops[v];
            for &(u, w) in &self.adjacency[v] {
                let cu = community[u];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_loops[cv] += w / 2.0;
                } else {
                    *links[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        let adjacency = links.into_iter().map(|m| m.into_iter().collect()).collect();
        LevelGraph::with_parts(adjacency, self_loops)
    }
}

/// Splits communities that are not connected within their own induced
/// subgraph into their connected pieces.
fn split_disconnected(graph: &HotLinkGraph, assignment: &[usize]) -> Vec<usize> {
    let n = graph.node_count();
    let mut out = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if out[start] != usize::MAX {
            continue;
        }
        out[start] = next;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in graph.neighbors(v) {
                if out[u] == usize::MAX && assignment[u] == assignment[start] {
                    out[u] = next;
                    queue.push_back(u);
                }
            }
        }
        next += 1;
    }
    out
}

/// One multilevel pass. The finest level starts from `membership`; every
/// coarser level starts from singletons. Accepted levels are appended to
/// `levels`.
fn multilevel(
    graph: &HotLinkGraph,
    mut membership: Vec<usize>,
    q: &mut f64,
    levels: &mut Vec<f64>,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let base = LevelGraph::from_graph(graph);
    if base.total_weight <= 0.0 {
        return membership;
    }
    let (mut community, mut moved) = base.local_moves(&membership, rng);
    let mut level = base;
    let mut at_base = true;
    while moved {
        let candidate: Vec<usize> = if at_base {
            community.clone()
        } else {
            membership.iter().map(|&s| community[s]).collect()
        };
        let cq = modularity(graph, &candidate).unwrap_or(*q);
        if cq - *q <= LEVEL_TOLERANCE {
            break;
        }
        membership = candidate;
        *q = cq;
        levels.push(cq);
        level = level.aggregate(&community);
        at_base = false;
        let singletons: Vec<usize> = (0..level.len()).collect();
        (community, moved) = level.local_moves(&singletons, rng);
    }
    membership
}

pub fn louvain(graph: &HotLinkGraph, seed: u64) -> CommunityPartition {
    let n = graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q0 = modularity(graph, &(0..n).collect::<Vec<_>>()).unwrap_or(0.0);
    let mut q = q0;
    let mut levels = vec![q0];

    // Repeat the multilevel pass from its own result until a full pass no
    // longer improves Q.
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let before = q;
        membership = multilevel(graph, membership, &mut q, &mut levels, &mut rng);
        if q - before <= LEVEL_TOLERANCE {
            break;
        }
    }

    let assignment = canonical_labels(&split_disconnected(graph, &membership));
    let modularity = modularity(graph, &assignment).unwrap_or(q).max(q);
    CommunityPartition {
        assignment,
        modularity,
        level_modularity: levels,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> HotLinkGraph {
        let labels = (0..n).map(|i| format!("v{i}")).collect();
        HotLinkGraph::from_parts(labels, edges.iter().map(|&(a, b)| (a, b, 1.0))).unwrap()
    }

    #[test]
    fn two_triangles_split_at_the_bridge() {
        let g = graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]);
        for seed in 0..20 {
            let p = louvain(&g, seed);
            assert_eq!(p.assignment, vec![0, 0, 0, 1, 1, 1], "seed {seed}");
            assert!((p.modularity - 0.357_142_857_142_857).abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge_stays_together() {
        let p = louvain(&graph(2, &[(0, 1)]), 7);
        assert_eq!(p.assignment, vec![0, 0]);
        assert!(p.modularity.abs() < 1e-15);
    }

    #[test]
    fn clique_is_one_community() {
        let p = louvain(&graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]), 3);
        assert_eq!(p.assignment, vec![0; 4]);
        assert!(p.modularity.abs() < 1e-15);
    }

    #[test]
    fn levels_never_decrease() {
        let mut edges = Vec::new();
        for block in 0..4 {
            let base = block * 5;
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((base + i, base + j));
                }
            }
            edges.push((base + 4, (base + 5) % 20));
        }
        let g = graph(20, &edges);
        let p = louvain(&g, 11);
        assert!(p.level_modularity.windows(2).all(|w| w[1] >= w[0]));
        assert!(p.modularity >= *p.level_modularity.last().unwrap());
        assert_eq!(p.community_count(), 4);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let edges: Vec<(usize, usize)> = (0..30)
            .map(|i| (i % 12, (i * 7 + 3) % 12))
            .filter(|(a, b)| a != b)
            .collect();
        let g = graph(12, &edges);
        assert_eq!(louvain(&g, 99), louvain(&g, 99));
    }

    #[test]
    fn empty_graph() {
        let p = louvain(&HotLinkGraph::empty(), 0);
        assert!(p.assignment.is_empty());
        assert_eq!(p.modularity, 0.0);
    }
}
