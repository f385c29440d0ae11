//! Detection of discontinuous change ("hot spots") in three consecutive
//! years of aggregated node-to-node citation matrices.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`corpus`] parses per-year edge lists, harmonizes renamed nodes and
//!    aligns the three years over the nodes that cite in all of them.
//! 2. [`entropy`] computes Kullback–Leibler contributions per cell, node
//!    margins, the revision of the prediction and the per-cell triangle score.
//! 3. [`flags`] turns those values into mean ± k·SD flag sets.
//! 4. [`netgraph`] builds the undirected graph of flagged links, its
//!    components and communities.
//! 5. [`io_export`] writes Pajek, VOSviewer, overlay and report files.
//!
//! [`pipeline`] wires the stages together behind a flat configuration.

pub mod corpus;
pub mod entropy;
pub mod error;
pub mod flags;
pub mod io_export;
pub mod netgraph;
pub mod numeric;
pub mod pipeline;
pub mod strategy;

pub use error::{Error, Result};
