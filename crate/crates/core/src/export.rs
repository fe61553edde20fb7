//! Graph exports: Graphviz DOT and Aldebaran AUT.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::marking_summary;
use crate::scg::{Completeness, ScGraph};

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One node per class (dead classes drawn as double octagons), one edge per
/// firing labelled with its label or `tau`.
pub fn to_dot(g: &ScGraph) -> String {
    let net = g.ptpn().net();
    let adj = g.adjacency();
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", dot_escape(net.name())).unwrap();
    if let Completeness::Partial { frontier, .. } = g.completeness() {
        writeln!(out, "  // partial exploration: {} unexplored classes", frontier.len()).unwrap();
    }
    writeln!(out, "  node [shape=box, fontname=\"monospace\"];").unwrap();
    for (i, c) in g.classes().iter().enumerate() {
        let style = if adj[i].is_empty() { ", shape=doubleoctagon" } else { "" };
        let summary = marking_summary(net, &c.marking);
        writeln!(out, "  c{i} [label=\"c{i}\\n{}\"{style}];", dot_escape(&summary)).unwrap();
    }
    for e in g.edges() {
        let label = g.edge_label(e).unwrap_or("tau");
        let members = g.edge_members(e).join(",");
        writeln!(
            out,
            "  c{} -> c{} [label=\"{} {{{}}}\"];",
            e.source,
            e.target,
            dot_escape(label),
            dot_escape(&members)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Aldebaran format: `des (0, edges, states)` then one `(src, "label", dst)`
/// line per edge; silent firings are written as `tau`.
pub fn to_aut(g: &ScGraph) -> String {
    let mut out = String::new();
    writeln!(out, "des (0, {}, {})", g.edges().len(), g.classes().len()).unwrap();
    for e in g.edges() {
        let label = g.edge_label(e).unwrap_or("tau");
        writeln!(out, "({}, \"{}\", {})", e.source, label, e.target).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct AutError {
    pub line: usize,
    pub message: String,
}

/// A labelled transition system read back from AUT text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aut {
    pub initial: usize,
    pub states: usize,
    pub edges: Vec<(usize, String, usize)>,
}

pub fn parse_aut(text: &str) -> Result<Aut, AutError> {
    let err = |line: usize, m: &str| AutError {
        line,
        message: m.to_string(),
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let inner = header
        .trim()
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|s| s.strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| err(1, "expected `des (init, edges, states)`"))?;
    let nums: Vec<usize> = inner
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| err(1, "header numbers"))?;
    let [initial, count, states] = nums[..] else {
        return Err(err(1, "header needs three numbers"));
    };
    let mut edges = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let body = raw
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| err(line, "expected `(src, \"label\", dst)`"))?;
        let (src, rest) = body.split_once(',').ok_or_else(|| err(line, "missing label"))?;
        let (label, dst) = rest.rsplit_once(',').ok_or_else(|| err(line, "missing target"))?;
        let label = label
            .trim()
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .ok_or_else(|| err(line, "label must be quoted"))?;
        let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| err(line, "bad state number"));
        let (src, dst) = (parse(src)?, parse(dst)?);
        if src >= states || dst >= states {
            return Err(err(line, "state out of range"));
        }
        edges.push((src, label.to_string(), dst));
    }
    if edges.len() != count {
        return Err(err(1, "edge count does not match header"));
    }
    Ok(Aut {
        initial,
        states,
        edges,
    })
}
