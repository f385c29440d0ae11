//! Interchange formats: Pajek, VOSviewer, base-map overlays and the CSV/JSON
//! reports.
//!
//! Writers use LF endings and fixed float formatting (`numfmt`) so output is
//! byte-identical across runs.

pub mod numfmt;
pub mod overlay;
pub mod pajek;
pub mod reports;
pub mod vosviewer;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::netgraph::{ComponentPartition, HotLinkGraph};
use crate::strategy::{Named, Registry};
use overlay::{BaseMap, OverlayCategory};

/// Creates `path` (and its parent directory), runs `body` on a buffered
/// writer and flushes. I/O errors raised inside `body` are re-attributed to
/// `path`.
pub fn write_file<F>(path: &Path, body: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn open_file(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// One figure-style overlay: a named list of colored categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayFigure {
    pub name: String,
    pub categories: Vec<OverlayCategory>,
}

/// Everything an exporter may draw on.
pub struct ExportContext<'a> {
    pub graph: &'a HotLinkGraph,
    pub communities: &'a [usize],
    pub components: &'a ComponentPartition,
    pub basemap: Option<&'a BaseMap>,
    pub overlays: &'a [OverlayFigure],
    pub neutral_color: &'a str,
}

/// An output format selectable by name.
pub trait Exporter: Named + Send + Sync {
    /// Writes this format's files into `dir` and returns their paths.
    fn export(&self, ctx: &ExportContext<'_>, dir: &Path) -> Result<Vec<PathBuf>>;
}

fn write_unmatched(path: &Path, labels: &[String]) -> Result<PathBuf> {
    write_file(path, |w| {
        for l in labels {
            writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    })
}

fn vosviewer_pair(
    graph: &HotLinkGraph,
    clusters: &[usize],
    basemap: Option<&BaseMap>,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    let map_path = dir.join(format!("{stem}_map.txt"));
    let net_path = dir.join(format!("{stem}_network.txt"));
    let mut unmatched = Vec::new();
    let mut net_buf = Vec::new();
    let mut out = vec![write_file(&map_path, |w| {
        unmatched = vosviewer::write_vosviewer_files(graph, clusters, basemap, w, &mut net_buf)?;
        Ok(())
    })?];
    out.push(write_file(&net_path, |w| {
        w.write_all(&net_buf).map_err(|e| Error::io(&net_path, e))
    })?);
    if basemap.is_some() {
        if !unmatched.is_empty() {
            log::warn!("{} node(s) of {stem} not found in the base map", unmatched.len());
        }
        out.push(write_unmatched(&dir.join(format!("{stem}_unmatched.txt")), &unmatched)?);
    }
    Ok(out)
}

/// VOSviewer map and network files for the whole hot-link graph, colored by
/// community.
pub struct VosviewerExporter;

impl Named for VosviewerExporter {
    fn name(&self) -> &'static str {
        "vosviewer"
    }
    fn description(&self) -> &'static str {
        "VOSviewer map/network text files, clusters = communities"
    }
}

impl Exporter for VosviewerExporter {
    fn export(&self, ctx: &ExportContext<'_>, dir: &Path) -> Result<Vec<PathBuf>> {
        vosviewer_pair(ctx.graph, ctx.communities, ctx.basemap, dir, "vosviewer")
    }
}

/// Base-map rows annotated with flag categories, one file per figure.
pub struct OverlayExporter;

impl Named for OverlayExporter {
    fn name(&self) -> &'static str {
        "overlay"
    }
    fn description(&self) -> &'static str {
        "flag categories projected onto a base map (needs --basemap)"
    }
}

impl Exporter for OverlayExporter {
    fn export(&self, ctx: &ExportContext<'_>, dir: &Path) -> Result<Vec<PathBuf>> {
        let Some(map) = ctx.basemap else {
            log::info!("no base map given; overlay export skipped");
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for fig in ctx.overlays {
            let path = dir.join(format!("overlay_{}.txt", fig.name));
            let mut outcome = Default::default();
            out.push(write_file(&path, |w| {
                outcome = overlay::write_overlay(&fig.categories, map, ctx.neutral_color, w)?;
                Ok(())
            })?);
            let overlay::OverlayOutcome { colored, unmatched } = outcome;
            log::info!("overlay {}: {colored:?}", fig.name);
            if !unmatched.is_empty() {
                out.push(write_unmatched(
                    &dir.join(format!("overlay_{}_unmatched.txt", fig.name)),
                    &unmatched,
                )?);
            }
        }
        Ok(out)
    }
}

/// Pajek and VOSviewer files restricted to the largest component.
pub struct GiantComponentExporter;

impl Named for GiantComponentExporter {
    fn name(&self) -> &'static str {
        "giant"
    }
    fn description(&self) -> &'static str {
        "largest connected component as Pajek .net/.clu and VOSviewer files"
    }
}

impl Exporter for GiantComponentExporter {
    fn export(&self, ctx: &ExportContext<'_>, dir: &Path) -> Result<Vec<PathBuf>> {
        let members = if ctx.components.is_empty() {
            Vec::new()
        } else {
            ctx.components.members(0)
        };
        let giant = ctx.graph.subgraph(&members)?;
        let clusters =
            crate::netgraph::canonical_labels(&members.iter().map(|&v| ctx.communities[v]).collect::<Vec<_>>());
        let net = dir.join("giant_component.net");
        let clu = dir.join("giant_component.clu");
        let mut out = vec![
            write_file(&net, |w| {
                pajek::write_pajek_net(&giant, w).map_err(|e| Error::io(&net, e))
            })?,
            write_file(&clu, |w| {
                pajek::write_pajek_clu(&clusters, w).map_err(|e| Error::io(&clu, e))
            })?,
        ];
        out.extend(vosviewer_pair(&giant, &clusters, ctx.basemap, dir, "giant_vosviewer")?);
        Ok(out)
    }
}

pub fn exporters() -> Registry<dyn Exporter> {
    let mut reg: Registry<dyn Exporter> = Registry::new("export format");
    reg.register(Box::new(VosviewerExporter))
        .register(Box::new(OverlayExporter))
        .register(Box::new(GiantComponentExporter));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::connected_components;

    #[test]
    fn registry_lists_all_formats() {
        let reg = exporters();
        assert_eq!(reg.names(), vec!["vosviewer", "overlay", "giant"]);
        assert!(matches!(reg.get("svg"), Err(Error::UnknownStrategy { .. })));
    }

    #[test]
    fn giant_export_keeps_largest_component() {
        let g = HotLinkGraph::from_labeled_links([("A", "B", -1.0), ("B", "C", -2.0), ("D", "E", -1.0)]);
        let comps = connected_components(&g);
        let communities = vec![1, 1, 1, 0, 0];
        let ctx = ExportContext {
            graph: &g,
            communities: &communities,
            components: &comps,
            basemap: None,
            overlays: &[],
            neutral_color: "#cccccc",
        };
        let dir = tempfile::tempdir().unwrap();
        let files = GiantComponentExporter.export(&ctx, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        let net = fs::read_to_string(dir.path().join("giant_component.net")).unwrap();
        assert_eq!(
            net,
            "*Vertices 3\n1 \"A\"\n2 \"B\"\n3 \"C\"\n*Edges\n1 2 1.00000\n2 3 2.00000\n"
        );
        let clu = fs::read_to_string(dir.path().join("giant_component.clu")).unwrap();
        assert_eq!(clu, "*Vertices 3\n1\n1\n1\n");
    }

    #[test]
    fn overlay_skipped_without_basemap() {
        let g = HotLinkGraph::empty();
        let comps = connected_components(&g);
        let ctx = ExportContext {
            graph: &g,
            communities: &[],
            components: &comps,
            basemap: None,
            overlays: &[],
            neutral_color: "#cccccc",
        };
        let dir = tempfile::tempdir().unwrap();
        assert!(OverlayExporter.export(&ctx, dir.path()).unwrap().is_empty());
    }
}
