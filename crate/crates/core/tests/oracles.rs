//! Library results against independent reference computations.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citeheat::corpus::{relative_frequencies, YearMatrix};
use citeheat::entropy::{revision_of_prediction, Direction};
use citeheat::flags::flag_revision;
use citeheat::netgraph::{connected_components, degree_centrality, louvain, modularity, HotLinkGraph};
use citeheat::pipeline::{run_pipeline, RunConfig, YearInput};

use common::*;

#[test]
fn frequencies_are_correctly_rounded_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let records: Vec<(u32, u32, u64)> = (0..10u32)
            .map(|i| (i, (i * 7 + 3) % 10, rng.random_range(1..=1_000_000)))
            .collect();
        let m = YearMatrix::from_records("y", records.clone());
        let freqs = relative_frequencies(&m).unwrap();
        let total: u64 = records.iter().map(|r| r.2).sum();
        let mut exact_sum = BigRational::from_integer(BigInt::from(0));
        let half_ulp = BigRational::new(BigInt::from(1), BigInt::from(1u64 << 53));
        assert_eq!(freqs.len(), 10);
        for (cell, &f) in &freqs {
            let c = records
                .iter()
                .find(|r| r.0 == cell.citing && r.1 == cell.cited)
                .unwrap()
                .2;
            let exact = BigRational::new(BigInt::from(c), BigInt::from(total));
            let got = BigRational::from_float(f).unwrap();
            let diff = got - &exact;
            let err = if diff < BigRational::from_integer(BigInt::from(0)) {
                -diff
            } else {
                diff
            };
            assert!(err <= &exact * &half_ulp, "cell {cell:?}");
            exact_sum += exact;
        }
        assert_eq!(exact_sum, BigRational::from_integer(BigInt::from(1)));
        assert!((fsum(freqs.values().copied()) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn edge_list_totals_match_hand_tally() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y.tsv");
    fs::write(&path, "# four records\nA\tB\t3\nB\tC\t2\nC\tA\t4\nA\tC\t1\n").unwrap();
    let m = citeheat::corpus::parse_edge_list(&path, "2011").unwrap();
    // rows: A cites 4, B cites 2, C cites 4; columns: A 4, B 3, C 3
    let citing: Vec<u64> = m.citing_totals().values().copied().collect();
    let cited: Vec<u64> = m.cited_totals().values().copied().collect();
    assert_eq!(citing, [4, 2, 4]);
    assert_eq!(cited, [4, 3, 3]);
    assert_eq!(m.grand_total(), 10);
}

fn planted_graph(rng: &mut ChaCha8Rng) -> (Vec<String>, Vec<(usize, usize, f64)>) {
    // dyads and triads over 100 nodes, then a few random bridges
    let mut nodes: Vec<usize> = (0..100).collect();
    nodes.shuffle(rng);
    let mut edges = Vec::new();
    let mut rest = &nodes[..];
    while rest.len() >= 3 {
        let size = if rng.random_bool(0.5) { 2 } else { 3 };
        let (group, tail) = rest.split_at(size);
        for w in group.windows(2) {
            edges.push((w[0], w[1], 1.0));
        }
        if size == 3 && rng.random_bool(0.5) {
            edges.push((group[0], group[2], 1.0));
        }
        rest = tail;
    }
    for w in rest.windows(2) {
        edges.push((w[0], w[1], 1.0));
    }
    if rest.len() == 1 {
        edges.push((rest[0], nodes[0], 1.0));
    }
    for _ in 0..5 {
        let (a, b) = (rng.random_range(0..100), rng.random_range(0..100));
        if a != b {
            edges.push((a, b, 2.0));
        }
    }
    ((0..100).map(|i| format!("j{i:03}")).collect(), edges)
}

#[test]
fn components_match_union_find() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let (labels, edges) = planted_graph(&mut rng);
        let graph = HotLinkGraph::from_parts(labels, edges.iter().copied()).unwrap();
        let parts = connected_components(&graph);
        let mut uf = UnionFind::new(100);
        for &(a, b, _) in &edges {
            uf.union(a, b);
        }
        let expected = uf.groups();
        let got: BTreeSet<Vec<usize>> = (0..parts.len()).map(|c| parts.members(c)).collect();
        assert_eq!(got, expected);
        let mut sizes: Vec<usize> = expected.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(parts.sizes, sizes);
    }
}

#[test]
fn modularity_matches_dense_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.random_range(3..30);
        let mut edges = Vec::new();
        for i in 0..n {
            edges.push((i, (i + 1) % n, rng.random_range(1..10) as f64 / 4.0));
            for j in i + 2..n {
                if rng.random_bool(0.2) {
                    edges.push((i, j, rng.random_range(1..10) as f64 / 4.0));
                }
            }
        }
        edges.retain(|&(a, b, _)| a != b);
        let labels = (0..n).map(|i| format!("v{i}")).collect();
        let graph = HotLinkGraph::from_parts(labels, edges.iter().copied()).unwrap();
        let k = rng.random_range(1..=n);
        let assignment: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let q = modularity(&graph, &assignment).unwrap();
        let o = dense_modularity(n, &graph_edges(&graph), &assignment);
        assert!((q - o).abs() < 1e-12, "{q} vs {o}");
        assert!(modularity(&graph, &vec![0; n]).unwrap().abs() < 1e-12);
    }
}

fn graph_edges(graph: &HotLinkGraph) -> Vec<(usize, usize, f64)> {
    graph.edges().iter().map(|e| (e.a, e.b, e.weight)).collect()
}

#[test]
fn louvain_small_cases_match_enumeration() {
    let single = HotLinkGraph::from_parts(vec!["A".into(), "B".into()], [(0, 1, 1.0)]).unwrap();
    let best = brute_force_max_modularity(2, &graph_edges(&single));
    assert!(best.abs() < 1e-15);
    assert_eq!(louvain(&single, 0).assignment, vec![0, 0]);

    let clique_edges: Vec<(usize, usize, f64)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j, 1.0))).collect();
    let labels = (0..4).map(|i| format!("v{i}")).collect();
    let clique = HotLinkGraph::from_parts(labels, clique_edges.iter().copied()).unwrap();
    assert!(brute_force_max_modularity(4, &clique_edges).abs() < 1e-15);
    let p = louvain(&clique, 0);
    assert_eq!(p.assignment, vec![0; 4]);

    let bridge = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)].map(|(a, b)| (a, b, 1.0));
    let best = brute_force_max_modularity(6, &bridge);
    assert!((best - (6.0 / 7.0 - 0.5)).abs() < 1e-12);
}

#[test]
fn degree_equals_adjacency_row_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (labels, edges) = planted_graph(&mut rng);
    let graph = HotLinkGraph::from_parts(labels, edges.iter().copied()).unwrap();
    let mut adj = vec![vec![0u8; 100]; 100];
    for &(a, b, _) in &edges {
        adj[a][b] = 1;
        adj[b][a] = 1;
    }
    let expected: Vec<usize> = adj.iter().map(|row| row.iter().map(|&x| x as usize).sum()).collect();
    assert_eq!(degree_centrality(&graph), expected);
}

#[test]
fn revision_flags_equal_brute_force_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let counts = random_counts(&mut rng, 10, 0.3, 30);
        let tensor = tensor_from_counts(&counts);
        for d in Direction::BOTH {
            let rev = revision_of_prediction(&tensor, d).unwrap();
            let flags = flag_revision(&rev, 1.0).unwrap();
            let n = rev.values.len() as f64;
            let mean = fsum(rev.values.iter().copied()) / n;
            let sd = (fsum(rev.values.iter().map(|v| (v - mean).powi(2))) / n).sqrt();
            let expected: BTreeSet<u32> = rev
                .values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v < mean - sd)
                .map(|(i, _)| i as u32)
                .collect();
            assert_eq!(flags.nodes, expected);
        }
    }
}

/// Expected `hot_links.csv` and `revision_cited.csv` computed from counts
/// alone, compared byte for byte with the pipeline output.
#[test]
fn pipeline_csv_matches_oracle_on_ten_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let counts = random_counts(&mut rng, 10, 0.35, 25);
    let g: Vec<u64> = counts.iter().map(|m| grand_total(m)).collect();
    let dir = tempfile::tempdir().unwrap();
    let years = write_years(dir.path(), &counts, ["2011", "2012", "2013"]);
    let cfg = RunConfig::new(
        years
            .into_iter()
            .map(|(label, path)| YearInput { label, path })
            .collect(),
        dir.path().join("out"),
    );
    run_pipeline(&cfg).unwrap();

    // hot links
    let mut scores = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            let (p, m, q) = (counts[0][i][j], counts[1][i][j], counts[2][i][j]);
            if p > 0 && m > 0 && q > 0 {
                let s = fsum([
                    exact_kl_term(m, g[1], p, g[0]),
                    exact_kl_term(q, g[2], m, g[1]),
                    -exact_kl_term(q, g[2], p, g[0]),
                ]);
                scores.push((i, j, s));
            }
        }
    }
    let n = scores.len() as f64;
    let mean = fsum(scores.iter().map(|s| s.2)) / n;
    let sd = (fsum(scores.iter().map(|s| (s.2 - mean).powi(2))) / n).sqrt();
    let mut hot: Vec<_> = scores
        .into_iter()
        .filter(|&(i, j, s)| i != j && s < mean - sd)
        .collect();
    hot.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut expected = String::from("citing,cited,score_mbits\n");
    for (i, j, s) in &hot {
        expected.push_str(&format!("{},{},{:.6}\n", name(*i), name(*j), s * 1000.0));
    }
    let got = fs::read_to_string(dir.path().join("out/links/hot_links.csv")).unwrap();
    assert!(!hot.is_empty());
    assert_eq!(got, expected);

    // revision, cited direction
    let mut per_node = vec![Vec::new(); 10];
    for i in 0..10 {
        for j in 0..10 {
            let (p, m, q) = (counts[0][i][j], counts[1][i][j], counts[2][i][j]);
            if p > 0 && m > 0 && q > 0 {
                per_node[j].push((q as f64 / g[2] as f64) * exact_log2_ratio(m, g[1], p, g[0]));
            }
        }
    }
    let rev: Vec<f64> = per_node.into_iter().map(fsum).collect();
    let mean = fsum(rev.iter().copied()) / 10.0;
    let sd = (fsum(rev.iter().map(|v| (v - mean).powi(2))) / 10.0).sqrt();
    let mut order: Vec<usize> = (0..10).collect();
    order.sort_by(|&a, &b| rev[a].total_cmp(&rev[b]).then(a.cmp(&b)));
    let mut expected = String::from("rank,label,revision,flagged\n");
    for (rank, &v) in order.iter().enumerate() {
        let flagged = u8::from(rev[v] < mean - sd);
        expected.push_str(&format!("{},{},{:.6},{flagged}\n", rank + 1, name(v), rev[v] * 1000.0));
    }
    let got = fs::read_to_string(dir.path().join("out/journals/revision_cited.csv")).unwrap();
    assert_eq!(got, expected);

    let summary: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/journals/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["format_version"], 1);
    assert_eq!(summary["hot_links"]["flagged"], hot.len());
}
