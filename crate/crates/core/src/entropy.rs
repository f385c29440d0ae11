//! Information-theoretic indicators over aligned citation matrices.
//!
//! All quantities are computed in bits. Cells are always visited in
//! ascending `(citing, cited)` order and reduced with compensated
//! summation, so results do not depend on the rayon pool size.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{AlignedTensor, Cell, Frequencies, NodeId, YearPair};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, mean_and_sd, CompensatedSum};

/// Which side of a cell a node margin aggregates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Sum over the cells in which the node is cited.
    Cited,
    /// Sum over the cells in which the node cites.
    Citing,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Cited, Direction::Citing];

    pub fn node(self, cell: &Cell) -> NodeId {
        match self {
            Direction::Cited => cell.cited,
            Direction::Citing => cell.citing,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Cited => "cited",
            Direction::Citing => "citing",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reporting unit. Computation is always in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bits,
    #[default]
    Mbits,
    Microbits,
}

impl Unit {
    pub fn scale(self) -> f64 {
        match self {
            Unit::Bits => 1.0,
            Unit::Mbits => 1.0e3,
            Unit::Microbits => 1.0e6,
        }
    }

    pub fn from_bits(self, bits: f64) -> f64 {
        bits * self.scale()
    }

    pub fn to_bits(self, value: f64) -> f64 {
        value / self.scale()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Bits => "bits",
            Unit::Mbits => "mbits",
            Unit::Microbits => "microbits",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bits" | "bit" => Ok(Unit::Bits),
            "mbits" | "mbit" => Ok(Unit::Mbits),
            "microbits" | "microbit" => Ok(Unit::Microbits),
            other => Err(Error::Config(format!(
                "unknown unit {other:?} (expected bits, mbits or microbits)"
            ))),
        }
    }
}

/// `q·log2(q/p)`; a zero posterior contributes nothing.
pub fn kl_term(posterior: f64, prior: f64) -> f64 {
    if posterior == 0.0 {
        0.0
    } else {
        posterior * (posterior / prior).log2()
    }
}

/// Sparse per-cell values with the node count of the tensor they came from.
pub trait CellValues {
    fn node_count(&self) -> usize;
    fn values(&self) -> &BTreeMap<Cell, f64>;
}

/// Per-cell KL contributions for one year pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCells {
    pub pair: YearPair,
    pub node_count: usize,
    pub values: BTreeMap<Cell, f64>,
    pub grand_sum: f64,
}

impl CellValues for TransitionCells {
    fn node_count(&self) -> usize {
        self.node_count
    }
    fn values(&self) -> &BTreeMap<Cell, f64> {
        &self.values
    }
}

/// KL contribution of every masked cell, posterior given prior.
pub fn cell_divergence(
    prior: &Frequencies,
    posterior: &Frequencies,
    mask: &std::collections::BTreeSet<Cell>,
    pair: YearPair,
    node_count: usize,
) -> Result<TransitionCells> {
    let cells: Vec<Cell> = mask.iter().copied().collect();
    let values: Vec<(Cell, f64)> = cells
        .par_iter()
        .map(|cell| {
            let p = match prior.get(cell) {
                Some(&p) if p > 0.0 => p,
                _ => {
                    return Err(Error::MaskViolation {
                        citing: cell.citing,
                        cited: cell.cited,
                    })
                }
            };
            let q = posterior.get(cell).copied().unwrap_or(0.0);
            Ok((*cell, kl_term(q, p)))
        })
        .collect::<Result<_>>()?;
    let grand_sum = compensated_sum(values.iter().map(|(_, v)| *v));
    Ok(TransitionCells {
        pair,
        node_count,
        values: values.into_iter().collect(),
        grand_sum,
    })
}

/// [`cell_divergence`] for one of the tensor's year pairs.
pub fn transition(tensor: &AlignedTensor, pair: YearPair) -> Result<TransitionCells> {
    let (a, b) = pair.years();
    cell_divergence(
        &tensor.frequencies(a)?,
        &tensor.frequencies(b)?,
        tensor.pair_valid(pair),
        pair,
        tensor.node_count(),
    )
}

/// Node-level aggregation of cell values, with descriptive statistics over
/// the whole node set (nodes without cells count as zero).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JournalMargins {
    pub direction: Direction,
    pub values: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

impl JournalMargins {
    pub fn total(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }
}

fn aggregate<'a, I>(cells: I, node_count: usize, direction: Direction) -> JournalMargins
where
    I: IntoIterator<Item = (&'a Cell, &'a f64)>,
{
    let mut sums = vec![CompensatedSum::new(); node_count];
    for (cell, &v) in cells {
        sums[direction.node(cell) as usize].add(v);
    }
    let values: Vec<f64> = sums.iter().map(CompensatedSum::value).collect();
    let (mean, sd) = mean_and_sd(&values).unwrap_or((0.0, 0.0));
    JournalMargins {
        direction,
        values,
        mean,
        sd,
    }
}

pub fn margins<C: CellValues + ?Sized>(cells: &C, direction: Direction) -> JournalMargins {
    aggregate(cells.values(), cells.node_count(), direction)
}

pub fn margin_totals(cells: &TransitionCells, direction: Direction) -> JournalMargins {
    margins(cells, direction)
}

/// Per-node revision of the prediction of the third year by the first,
/// given the in-between year: `Σ q·log2(p'/p)` over the node's cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevisionVector {
    pub direction: Direction,
    pub values: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    /// Sum over all included cells.
    pub total: f64,
    /// Cells entering the sum.
    pub included_cells: usize,
    /// Cells with a posterior citation but no prior or in-between citation.
    pub excluded_cells: usize,
}

/// Per-cell revision terms over the included cell set, plus the number of
/// excluded cells.
pub fn revision_cells(tensor: &AlignedTensor) -> Result<(BTreeMap<Cell, f64>, usize)> {
    let p = tensor.frequencies(0)?;
    let p_mid = tensor.frequencies(1)?;
    let q = tensor.frequencies(2)?;
    let mut excluded = 0usize;
    let mut terms = BTreeMap::new();
    for (cell, &qv) in &q {
        match (p.get(cell), p_mid.get(cell)) {
            (Some(&pv), Some(&mv)) => {
                terms.insert(*cell, qv * (mv / pv).log2());
            }
            _ => excluded += 1,
        }
    }
    Ok((terms, excluded))
}

pub fn revision_of_prediction(tensor: &AlignedTensor, direction: Direction) -> Result<RevisionVector> {
    let (terms, excluded_cells) = revision_cells(tensor)?;
    let m = aggregate(&terms, tensor.node_count(), direction);
    Ok(RevisionVector {
        direction,
        total: compensated_sum(terms.values().copied()),
        values: m.values,
        mean: m.mean,
        sd: m.sd,
        included_cells: terms.len(),
        excluded_cells,
    })
}

/// The three informational distances among one cell's frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleTerms {
    /// In-between year given the first year.
    pub mid_given_prior: f64,
    /// Last year given the in-between year.
    pub post_given_mid: f64,
    /// Last year given the first year.
    pub post_given_prior: f64,
}

impl TriangleTerms {
    pub fn from_frequencies(prior: f64, mid: f64, post: f64) -> Self {
        TriangleTerms {
            mid_given_prior: kl_term(mid, prior),
            post_given_mid: kl_term(post, mid),
            post_given_prior: kl_term(post, prior),
        }
    }

    /// Detour minus direct distance. Negative means the path through the
    /// in-between year is shorter than the direct one.
    pub fn score(&self) -> f64 {
        self.mid_given_prior + self.post_given_mid - self.post_given_prior
    }
}

/// Triangle scores for every cell cited in all three years.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleCells {
    pub node_count: usize,
    pub values: BTreeMap<Cell, f64>,
    pub mean: f64,
    pub sd: f64,
    pub grand_sum: f64,
}

impl CellValues for TriangleCells {
    fn node_count(&self) -> usize {
        self.node_count
    }
    fn values(&self) -> &BTreeMap<Cell, f64> {
        &self.values
    }
}

pub fn triangle_evaluation(tensor: &AlignedTensor) -> Result<TriangleCells> {
    if tensor.tri_valid().is_empty() {
        return Err(Error::EmptyTriangle);
    }
    let f = [tensor.frequencies(0)?, tensor.frequencies(1)?, tensor.frequencies(2)?];
    let cells: Vec<Cell> = tensor.tri_valid().iter().copied().collect();
    let scores: Vec<f64> = cells
        .par_iter()
        .map(|c| TriangleTerms::from_frequencies(f[0][c], f[1][c], f[2][c]).score())
        .collect();
    let (mean, sd) = mean_and_sd(&scores).unwrap_or((0.0, 0.0));
    Ok(TriangleCells {
        node_count: tensor.node_count(),
        grand_sum: compensated_sum(scores.iter().copied()),
        values: cells.into_iter().zip(scores).collect(),
        mean,
        sd,
    })
}

pub fn triangle_margins(cells: &TriangleCells, direction: Direction) -> JournalMargins {
    margins(cells, direction)
}
