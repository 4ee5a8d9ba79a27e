//! Text edge-list format and the provenance sidecar.
//!
//! ```text
//! # locograph v1 n=<N> d=<d>
//! # <optional further comment lines>
//! u v
//! ```
//!
//! Edges are 0-indexed with `u < v`, one per line, sorted.

use std::fmt::Write as _;

use serde::Serialize;

use super::LocalGraph;
use crate::error::{Error, Result};
use crate::lattice::SublatticeHNF;

pub const EDGE_LIST_MAGIC: &str = "# locograph v1";

/// Renders `g` with the standard header, then `comments` (each emitted as a
/// `# ` line), then the sorted edges.
pub fn write_edge_list(g: &LocalGraph, d: usize, comments: &[String]) -> String {
    let mut out = String::with_capacity(16 * g.edge_count() + 64);
    writeln!(out, "{EDGE_LIST_MAGIC} n={} d={d}", g.order()).unwrap();
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix(EDGE_LIST_MAGIC)?;
    let mut n = None;
    let mut d = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("n=") {
            n = v.parse().ok();
        } else {
            let v = field.strip_prefix("d=")?;
            d = v.parse().ok();
        }
    }
    Some((n?, d?))
}

/// Parses an edge list, returning the graph and the header's dimension.
pub fn parse_edge_list(text: &str) -> Result<(LocalGraph, usize)> {
    let mut lines = text.lines().enumerate();
    let (n, d) = match lines.next() {
        Some((_, header)) => parse_header(header.trim_end()).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("expected header `{EDGE_LIST_MAGIC} n=<N> d=<d>`"),
        })?,
        None => return Err(Error::Parse { line: 1, message: "empty file".into() }),
    };
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in lines {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse { line: lineno, message };
        let mut parts = line.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("expected two vertex ids".into()));
        };
        let u: u32 = a.parse().map_err(|_| bad(format!("invalid vertex id `{a}`")))?;
        let v: u32 = b.parse().map_err(|_| bad(format!("invalid vertex id `{b}`")))?;
        if u >= v {
            return Err(bad(format!("edge `{u} {v}` must satisfy u < v")));
        }
        if v as usize >= n {
            return Err(bad(format!("vertex {v} out of range for n={n}")));
        }
        if !seen.insert((u, v)) {
            return Err(bad(format!("duplicate edge `{u} {v}`")));
        }
        edges.push((u, v));
    }
    Ok((LocalGraph::from_edges(n, &edges)?, d))
}

#[derive(Serialize)]
struct ProvenanceRecord<'a> {
    d: usize,
    index: u64,
    min_distance: u64,
    orbit_size: u64,
    rep: &'a SublatticeHNF,
    /// Half-open vertex range `[start, end)`.
    vertices: [u32; 2],
}

/// One JSON line per tagged component: the orbit record plus its vertex range.
pub fn provenance_jsonl(g: &LocalGraph) -> String {
    let mut out = String::new();
    for c in g.components() {
        let Some(p) = &c.provenance else { continue };
        let start = *c.vertices.first().expect("components are non-empty");
        let end = *c.vertices.last().expect("components are non-empty") + 1;
        debug_assert_eq!((end - start) as usize, c.vertices.len(), "tagged components are contiguous");
        let rec = ProvenanceRecord {
            d: p.d,
            index: p.orbit.index,
            min_distance: p.orbit.min_distance,
            orbit_size: p.orbit.orbit_size,
            rep: &p.orbit.rep,
            vertices: [start, end],
        };
        out.push_str(&serde_json::to_string(&rec).expect("serializable"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::build_quotient;

    #[test]
    fn roundtrip_torus() {
        let g = build_quotient(&SublatticeHNF::scaled(2, 4)).unwrap();
        let text = write_edge_list(&g, 2, &["seed=3".to_string()]);
        assert!(text.starts_with("# locograph v1 n=16 d=2\n# seed=3\n"));
        let (back, d) = parse_edge_list(&text).unwrap();
        assert_eq!(d, 2);
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn rejects_malformed_input() {
        let err = |t: &str| match parse_edge_list(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(err("n=3\n0 1\n"), 1);
        assert_eq!(err("# locograph v1 n=3 d=1\n0 1\n1 0\n"), 3);
        assert_eq!(err("# locograph v1 n=3 d=1\n0 1\n0 1\n"), 3);
        assert_eq!(err("# locograph v1 n=3 d=1\n0 3\n"), 2);
        assert_eq!(err("# locograph v1 n=3 d=1\n0 x\n"), 2);
        assert_eq!(err("# locograph v1 n=3 d=1\n1 1\n"), 2);
    }

    #[test]
    fn provenance_lists_vertex_ranges() {
        let g = LocalGraph::disjoint_union([
            build_quotient(&SublatticeHNF::scaled(1, 4)).unwrap(),
            build_quotient(&SublatticeHNF::scaled(1, 5)).unwrap(),
        ]);
        let text = provenance_jsonl(&g);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            vec![
                r#"{"d":1,"index":4,"min_distance":4,"orbit_size":1,"rep":[[4]],"vertices":[0,4]}"#,
                r#"{"d":1,"index":5,"min_distance":5,"orbit_size":1,"rep":[[5]],"vertices":[4,9]}"#,
            ]
        );
    }
}
