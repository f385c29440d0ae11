//! Pajek `.net` (undirected, weighted) and `.clu` files.

use std::io::{self, BufRead, Write};
use std::path::Path;

use super::numfmt::sig6;
use crate::error::{Error, Result};
use crate::netgraph::HotLinkGraph;

/// `*Vertices N`, one `i "label"` line per node (1-based, node order), then
/// `*Edges` with `i j w` lines. An empty graph is the header alone.
pub fn write_pajek_net<W: Write>(graph: &HotLinkGraph, out: &mut W) -> io::Result<()> {
    writeln!(out, "*Vertices {}", graph.node_count())?;
    for (i, label) in graph.labels().iter().enumerate() {
        if label.contains('"') {
            log::warn!("replacing double quotes in Pajek label {label:?}");
        }
        writeln!(out, "{} \"{}\"", i + 1, label.replace('"', "'"))?;
    }
    if graph.edge_count() > 0 {
        writeln!(out, "*Edges")?;
        for e in graph.edges() {
            writeln!(out, "{} {} {}", e.a + 1, e.b + 1, sig6(e.weight))?;
        }
    }
    Ok(())
}

fn data_lines<'a, R: BufRead + 'a>(input: R, source: &'a Path) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    input.lines().enumerate().filter_map(move |(i, line)| match line {
        Err(e) => Some(Err(Error::io(source, e))),
        Ok(l) => {
            let t = l.trim().to_string();
            (!t.is_empty() && !t.starts_with('%')).then_some(Ok((i + 1, t)))
        }
    })
}

fn vertices_header(line: &str) -> Option<usize> {
    let mut parts = line.split_whitespace();
    let head = parts.next()?;
    if !head.eq_ignore_ascii_case("*vertices") {
        return None;
    }
    parts.next()?.parse().ok()
}

fn parse_index(token: Option<&str>, n: usize, source: &Path, line: usize) -> Result<usize> {
    let raw = token.ok_or_else(|| Error::parse(source, line, "missing vertex index"))?;
    match raw.parse::<usize>() {
        Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
        _ => Err(Error::parse(
            source,
            line,
            format!("vertex index {raw:?} out of range 1..={n}"),
        )),
    }
}

pub fn read_pajek_net<R: BufRead>(input: R, source: &Path) -> Result<HotLinkGraph> {
    let mut lines = data_lines(input, source);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source, 1, "missing *Vertices header"))??;
    let n =
        vertices_header(&header).ok_or_else(|| Error::parse(source, lineno, format!("malformed header {header:?}")))?;

    let mut labels = Vec::with_capacity(n);
    for expected in 0..n {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| Error::parse(source, lineno, "fewer vertex lines than declared"))??;
        let (idx, rest) = line.split_once(char::is_whitespace).unwrap_or((line.as_str(), ""));
        if parse_index(Some(idx), n, source, lineno)? != expected {
            return Err(Error::parse(
                source,
                lineno,
                "vertex lines must be numbered 1..N in order",
            ));
        }
        let rest = rest.trim();
        let label = match (rest.find('"'), rest.rfind('"')) {
            (Some(a), Some(b)) if b > a => rest[a + 1..b].to_string(),
            _ => rest.split_whitespace().next().unwrap_or("").to_string(),
        };
        labels.push(label);
    }

    let mut edges = Vec::new();
    if let Some(next) = lines.next() {
        let (lineno, line) = next?;
        if !line.eq_ignore_ascii_case("*edges") {
            return Err(Error::parse(source, lineno, format!("expected *Edges, found {line:?}")));
        }
        for item in lines {
            let (lineno, line) = item?;
            let mut parts = line.split_whitespace();
            let a = parse_index(parts.next(), n, source, lineno)?;
            let b = parse_index(parts.next(), n, source, lineno)?;
            let w = match parts.next() {
                None => 1.0,
                Some(raw) => raw
                    .parse::<f64>()
                    .map_err(|_| Error::parse(source, lineno, format!("malformed weight {raw:?}")))?,
            };
            edges.push((a, b, w));
        }
    }
    HotLinkGraph::from_parts(labels, edges)
}

/// `*Vertices N` followed by one 1-based cluster number per node.
pub fn write_pajek_clu<W: Write>(assignment: &[usize], out: &mut W) -> io::Result<()> {
    writeln!(out, "*Vertices {}", assignment.len())?;
    for c in assignment {
        writeln!(out, "{}", c + 1)?;
    }
    Ok(())
}

pub fn read_pajek_clu<R: BufRead>(input: R, source: &Path) -> Result<Vec<usize>> {
    let mut lines = data_lines(input, source);
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source, 1, "missing *Vertices header"))??;
    let n =
        vertices_header(&header).ok_or_else(|| Error::parse(source, lineno, format!("malformed header {header:?}")))?;
    let mut out = Vec::with_capacity(n);
    for item in lines {
        let (lineno, line) = item?;
        match line.parse::<usize>() {
            Ok(c) if c >= 1 => out.push(c - 1),
            _ => {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("malformed cluster number {line:?}"),
                ))
            }
        }
    }
    if out.len() != n {
        return Err(Error::parse(
            source,
            lineno,
            format!("header declares {n} vertices, found {}", out.len()),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn render(graph: &HotLinkGraph) -> String {
        let mut buf = Vec::new();
        write_pajek_net(graph, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn single_edge_layout() {
        let g = HotLinkGraph::from_labeled_links([("A", "B", 1.0)]);
        assert_eq!(render(&g), "*Vertices 2\n1 \"A\"\n2 \"B\"\n*Edges\n1 2 1.00000\n");
    }

    #[test]
    fn empty_graph_is_header_only() {
        let text = render(&HotLinkGraph::empty());
        assert_eq!(text, "*Vertices 0\n");
        let back = read_pajek_net(Cursor::new(text), Path::new("x.net")).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn reads_back_what_it_writes() {
        let g = HotLinkGraph::from_labeled_links([
            ("Ann Surg", "Hernia", -0.25),
            ("Hernia", "Surg Innov", -1.5),
            ("X", "Y", 3.0),
        ]);
        let text = render(&g);
        assert_eq!(read_pajek_net(Cursor::new(text), Path::new("x.net")).unwrap(), g);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let p = Path::new("bad.net");
        assert!(read_pajek_net(Cursor::new("*Vertex 2\n"), p).is_err());
        assert!(read_pajek_net(Cursor::new("*Vertices 2\n1 \"A\"\n"), p).is_err());
        assert!(read_pajek_net(Cursor::new("*Vertices 2\n1 \"A\"\n2 \"B\"\n*Edges\n1 3 1\n"), p).is_err());
        assert!(read_pajek_net(Cursor::new("*Vertices 2\n2 \"A\"\n1 \"B\"\n*Edges\n1 2 1\n"), p).is_err());
        assert!(read_pajek_net(Cursor::new("*Vertices 2\n1 \"A\"\n2 \"B\"\n*Arcs\n1 2 1\n"), p).is_err());
    }

    #[test]
    fn clu_is_one_based() {
        let mut buf = Vec::new();
        write_pajek_clu(&[0, 0, 1], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "*Vertices 3\n1\n1\n2\n");
        assert_eq!(
            read_pajek_clu(Cursor::new(buf), Path::new("x.clu")).unwrap(),
            vec![0, 0, 1]
        );

        let mut empty = Vec::new();
        write_pajek_clu(&[], &mut empty).unwrap();
        assert_eq!(empty, b"*Vertices 0\n");
        assert!(read_pajek_clu(Cursor::new("*Vertices 2\n1\n"), Path::new("x.clu")).is_err());
    }
}
