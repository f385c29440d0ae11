//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numeric code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use citeheat::corpus::{apply_name_changes, build_common_set, AlignedTensor, NamedYearMatrix, YearMatrix};

/// Exactly rounded float sum (Shewchuk partials, as in Python's `fsum`).
pub fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // round-half-even correction
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// `q · log2(q / p)` for `q = cq / gq`, `p = cp / gp`, with `q/p − 1` formed
/// exactly in integers so near-equal frequencies lose no precision.
pub fn exact_kl_term(cq: u64, gq: u64, cp: u64, gp: u64) -> f64 {
    if cq == 0 {
        return 0.0;
    }
    assert!(cp > 0, "prior must be positive");
    (cq as f64 / gq as f64) * exact_log2_ratio(cq, gq, cp, gp)
}

/// `log2((a/ga) / (b/gb))` via `ln_1p` of the exact integer excess.
pub fn exact_log2_ratio(a: u64, ga: u64, b: u64, gb: u64) -> f64 {
    let num = a as i128 * gb as i128 - b as i128 * ga as i128;
    let den = b as i128 * ga as i128;
    (num as f64 / den as f64).ln_1p() / std::f64::consts::LN_2
}

/// `|a − b| ≤ rel · scale`, where `scale` is the absolute mass behind the
/// value (sum of absolute terms), so near-zero sums are judged against the
/// size of what was summed.
pub fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * scale.max(a.abs()).max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn name(i: usize) -> String {
    format!("N{i:02}")
}

/// Dense `n × n` count matrices for three years. Each node keeps a positive
/// diagonal so every node cites in every year.
pub fn random_counts(rng: &mut ChaCha8Rng, n: usize, zero_prob: f64, max: u64) -> [Vec<Vec<u64>>; 3] {
    std::array::from_fn(|_| {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            rng.random_range(1..=max)
                        } else if rng.random_bool(zero_prob) {
                            0
                        } else {
                            rng.random_range(1..=max)
                        }
                    })
                    .collect()
            })
            .collect()
    })
}

pub fn named_years(counts: &[Vec<Vec<u64>>; 3], labels: [&str; 3]) -> Vec<NamedYearMatrix> {
    counts
        .iter()
        .zip(labels)
        .map(|(m, label)| {
            YearMatrix::from_records(
                label,
                m.iter()
                    .enumerate()
                    .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (name(i), name(j), c))),
            )
        })
        .collect()
}

pub fn tensor_from(named: Vec<NamedYearMatrix>) -> AlignedTensor {
    let (registry, matrices) = apply_name_changes(named, &[]).expect("no renames");
    build_common_set(&registry, matrices).expect("non-empty common set")
}

pub fn tensor_from_counts(counts: &[Vec<Vec<u64>>; 3]) -> AlignedTensor {
    tensor_from(named_years(counts, ["2011", "2012", "2013"]))
}

pub fn grand_total(m: &[Vec<u64>]) -> u64 {
    m.iter().flatten().sum()
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = x;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Groups as sorted member lists, sorted.
    pub fn groups(&mut self) -> BTreeSet<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.parent.len() {
            let r = self.find(v);
            by_root.entry(r).or_default().push(v);
        }
        by_root.into_values().collect()
    }
}

/// Modularity from a dense weight matrix, straight from the definition
/// `Q = (1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j)`.
pub fn dense_modularity(n: usize, edges: &[(usize, usize, f64)], assignment: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                terms.push(a[i][j] - k[i] * k[j] / two_m);
            }
        }
    }
    fsum(terms) / two_m
}

/// Every set partition of `0..n` as restricted-growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            rec(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    } else {
        let mut prefix = vec![0];
        rec(&mut prefix, 0, n, &mut out);
    }
    out
}

pub fn brute_force_max_modularity(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    all_partitions(n)
        .iter()
        .map(|p| dense_modularity(n, edges, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Relative path → bytes for every file under `root`.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// The 12-node fixture: stable background, one link rising 29 → 54 → 106
/// (node 10 citing node 3) and its reverse at 5 → 5 → 7.
pub fn dyad_counts() -> [Vec<Vec<u64>>; 3] {
    let injected = [(29, 5), (54, 5), (106, 7)];
    std::array::from_fn(|y| {
        (0..12)
            .map(|i| {
                (0..12)
                    .map(|j| match (i, j) {
                        (10, 3) => injected[y].0,
                        (3, 10) => injected[y].1,
                        _ if i == j => 40,
                        _ => 10 + ((3 * i + 5 * j) % 7) as u64,
                    })
                    .collect()
            })
            .collect()
    })
}

/// Writes three dense count matrices as TSV edge lists and returns their
/// paths.
pub fn write_years(dir: &Path, counts: &[Vec<Vec<u64>>; 3], labels: [&str; 3]) -> Vec<(String, PathBuf)> {
    counts
        .iter()
        .zip(labels)
        .map(|(m, label)| {
            let path = dir.join(format!("{label}.tsv"));
            let mut text = String::from("# citing\tcited\tcount\n");
            for (i, row) in m.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    if c > 0 {
                        text.push_str(&format!("{}\t{}\t{c}\n", name(i), name(j)));
                    }
                }
            }
            fs::write(&path, text).unwrap();
            (label.to_string(), path)
        })
        .collect()
}
