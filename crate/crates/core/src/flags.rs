//! Mean ± k·SD flagging of nodes and links.
//!
//! Every comparison is strict: a value equal to its threshold is not flagged.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::corpus::{AlignedTensor, Cell, NodeId, YearPair};
use crate::entropy::{
    margin_totals, revision_of_prediction, transition, triangle_evaluation, triangle_margins, Direction,
    JournalMargins, RevisionVector, TriangleCells, Unit,
};
use crate::error::{Error, Result};
use crate::numeric::mean_and_sd;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSpec {
    pub k: f64,
    pub mean: f64,
    pub sd: f64,
    pub upper: f64,
    pub lower: f64,
}

impl ThresholdSpec {
    /// Strictly below `mean − k·sd`.
    pub fn flags_low(&self, value: f64) -> bool {
        value < self.lower
    }

    /// Strictly above `mean + k·sd`.
    pub fn flags_high(&self, value: f64) -> bool {
        value > self.upper
    }

    fn degenerate(k: f64) -> Self {
        ThresholdSpec {
            k,
            mean: 0.0,
            sd: 0.0,
            upper: 0.0,
            lower: 0.0,
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("SD multiplier must be finite and >= 0, got {k}")))
    }
}

pub fn compute_threshold(values: &[f64], k: f64) -> Result<ThresholdSpec> {
    check_k(k)?;
    let (mean, sd) = mean_and_sd(values).ok_or(Error::EmptyValues)?;
    Ok(ThresholdSpec {
        k,
        mean,
        sd,
        upper: mean + k * sd,
        lower: mean - k * sd,
    })
}

fn threshold_or_degenerate(values: &[f64], k: f64) -> Result<ThresholdSpec> {
    match compute_threshold(values, k) {
        Err(Error::EmptyValues) => Ok(ThresholdSpec::degenerate(k)),
        other => other,
    }
}

fn below(values: &[f64], limit: f64) -> BTreeSet<NodeId> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < limit)
        .map(|(i, _)| i as NodeId)
        .collect()
}

fn above(values: &[f64], limit: f64) -> BTreeSet<NodeId> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > limit)
        .map(|(i, _)| i as NodeId)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicFlags {
    pub direction: Direction,
    pub up: BTreeSet<NodeId>,
    pub down: BTreeSet<NodeId>,
    /// Thresholds for the first and second consecutive pair.
    pub thresholds: [ThresholdSpec; 2],
}

/// Nodes beyond one SD of the mean in the same direction in both
/// consecutive year pairs. Thresholds are computed per pair.
pub fn flag_monotonic(first: &JournalMargins, second: &JournalMargins, k: f64) -> Result<MonotonicFlags> {
    if first.direction != second.direction {
        return Err(Error::DirectionMismatch(format!(
            "{} margins paired with {} margins",
            first.direction, second.direction
        )));
    }
    if first.values.len() != second.values.len() {
        return Err(Error::DirectionMismatch("margins cover different node sets".into()));
    }
    let t1 = threshold_or_degenerate(&first.values, k)?;
    let t2 = threshold_or_degenerate(&second.values, k)?;
    let up = above(&first.values, t1.upper)
        .intersection(&above(&second.values, t2.upper))
        .copied()
        .collect();
    let down = below(&first.values, t1.lower)
        .intersection(&below(&second.values, t2.lower))
        .copied()
        .collect();
    Ok(MonotonicFlags {
        direction: first.direction,
        up,
        down,
        thresholds: [t1, t2],
    })
}

/// Nodes whose value falls strictly below `mean − k·sd`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeFlags {
    pub direction: Direction,
    pub threshold: ThresholdSpec,
    pub nodes: BTreeSet<NodeId>,
}

fn flag_low(values: &[f64], direction: Direction, k: f64) -> Result<NodeFlags> {
    let threshold = threshold_or_degenerate(values, k)?;
    Ok(NodeFlags {
        direction,
        nodes: below(values, threshold.lower),
        threshold,
    })
}

pub fn flag_revision(revision: &RevisionVector, k: f64) -> Result<NodeFlags> {
    flag_low(&revision.values, revision.direction, k)
}

pub fn flag_triangle_nodes(margins: &JournalMargins, k: f64) -> Result<NodeFlags> {
    flag_low(&margins.values, margins.direction, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HotLink {
    pub citing: NodeId,
    pub cited: NodeId,
    /// Triangle score in bits.
    pub score: f64,
}

impl HotLink {
    pub fn cell(&self) -> Cell {
        Cell::new(self.citing, self.cited)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkFlags {
    pub threshold: ThresholdSpec,
    pub drop_loops: bool,
    pub loops_removed: usize,
    pub links: Vec<HotLink>,
}

/// Cells whose triangle score falls below `mean − k·sd` of all scored cells.
/// The threshold includes diagonal cells; loops are dropped afterwards.
pub fn flag_links(triangle: &TriangleCells, k: f64, drop_loops: bool) -> Result<LinkFlags> {
    let scores: Vec<f64> = triangle.values.values().copied().collect();
    let threshold = threshold_or_degenerate(&scores, k)?;
    let mut loops_removed = 0;
    let links = triangle
        .values
        .iter()
        .filter(|(_, &s)| threshold.flags_low(s))
        .filter(|(c, _)| {
            let drop = drop_loops && c.is_loop();
            loops_removed += drop as usize;
            !drop
        })
        .map(|(c, &score)| HotLink {
            citing: c.citing,
            cited: c.cited,
            score,
        })
        .collect();
    Ok(LinkFlags {
        threshold,
        drop_loops,
        loops_removed,
        links,
    })
}

/// Deletes the named nodes' rows and columns; frequencies and masks are
/// re-derived over the remaining cells.
pub fn remove_outliers(tensor: &AlignedTensor, names: &[String]) -> Result<AlignedTensor> {
    if names.is_empty() {
        return Ok(tensor.clone());
    }
    let drop = names
        .iter()
        .map(|n| tensor.registry().id(n).ok_or_else(|| Error::UnknownNode(n.clone())))
        .collect::<Result<BTreeSet<NodeId>>>()?;
    Ok(tensor.without_nodes(&drop))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagSettings {
    pub unit: Unit,
    pub k: f64,
    pub drop_loops: bool,
    pub outliers_removed: Vec<String>,
}

impl Default for FlagSettings {
    fn default() -> Self {
        FlagSettings {
            unit: Unit::Mbits,
            k: 1.0,
            drop_loops: true,
            outliers_removed: Vec::new(),
        }
    }
}

/// A value per direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerDirection<T> {
    pub cited: T,
    pub citing: T,
}

impl<T> PerDirection<T> {
    pub fn try_build(mut f: impl FnMut(Direction) -> Result<T>) -> Result<Self> {
        Ok(PerDirection {
            cited: f(Direction::Cited)?,
            citing: f(Direction::Citing)?,
        })
    }

    pub fn get(&self, d: Direction) -> &T {
        match d {
            Direction::Cited => &self.cited,
            Direction::Citing => &self.citing,
        }
    }
}

/// Grand sum and node margins of one year pair's KL cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub pair: YearPair,
    pub cells: usize,
    pub grand_sum: f64,
    pub margins: PerDirection<JournalMargins>,
}

/// All indicator values and flag sets for one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagReport {
    pub settings: FlagSettings,
    pub pairs: Vec<PairSummary>,
    pub monotonic: PerDirection<MonotonicFlags>,
    pub revision: PerDirection<RevisionVector>,
    pub revision_flagged: PerDirection<NodeFlags>,
    #[serde(skip)]
    pub triangle: TriangleCells,
    pub triangle_margins: PerDirection<JournalMargins>,
    pub triangle_flagged: PerDirection<NodeFlags>,
    pub hot_links: LinkFlags,
}

impl FlagReport {
    pub fn pair(&self, pair: YearPair) -> &PairSummary {
        self.pairs
            .iter()
            .find(|p| p.pair == pair)
            .expect("all pairs are computed")
    }
}

/// Runs every indicator and flag family over the tensor. The tensor is
/// expected to have outliers removed already; `settings.outliers_removed` is
/// recorded as given.
pub fn analyze(tensor: &AlignedTensor, settings: &FlagSettings) -> Result<FlagReport> {
    check_k(settings.k)?;
    let k = settings.k;

    let (pairs, rest) = rayon::join(
        || -> Result<Vec<PairSummary>> {
            YearPair::ALL
                .iter()
                .map(|&pair| {
                    let cells = transition(tensor, pair)?;
                    Ok(PairSummary {
                        pair,
                        cells: cells.values.len(),
                        grand_sum: cells.grand_sum,
                        margins: PerDirection::try_build(|d| Ok(margin_totals(&cells, d)))?,
                    })
                })
                .collect()
        },
        || -> Result<_> {
            let revision = PerDirection::try_build(|d| revision_of_prediction(tensor, d))?;
            let triangle = triangle_evaluation(tensor)?;
            Ok((revision, triangle))
        },
    );
    let pairs = pairs?;
    let (revision, triangle) = rest?;

    let monotonic = PerDirection::try_build(|d| flag_monotonic(pairs[0].margins.get(d), pairs[1].margins.get(d), k))?;
    let revision_flagged = PerDirection::try_build(|d| flag_revision(revision.get(d), k))?;
    let tri_margins = PerDirection::try_build(|d| Ok(triangle_margins(&triangle, d)))?;
    let triangle_flagged = PerDirection::try_build(|d| flag_triangle_nodes(tri_margins.get(d), k))?;
    let hot_links = flag_links(&triangle, k, settings.drop_loops)?;

    Ok(FlagReport {
        settings: settings.clone(),
        pairs,
        monotonic,
        revision,
        revision_flagged,
        triangle,
        triangle_margins: tri_margins,
        triangle_flagged,
        hot_links,
    })
}
