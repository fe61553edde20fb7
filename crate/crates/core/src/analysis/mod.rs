//! Verdicts over explored state class graphs.
//!
//! Three graph analyses decide a model: reachability of a timeout event,
//! dead classes that are not accepting (timelocks), and inevitability of a
//! success event. The [`oracle`] submodule enumerates the discrete-time
//! semantics directly and serves as an independent reference.

pub mod oracle;

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::model::{Marking, Net, PlaceId};
use crate::scg::{Edge, ScGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("the state class graph is partial; a complete graph is required")]
    PartialGraph,
    #[error("label `{0}` is not in the model's alphabet")]
    UnknownLabel(String),
    #[error("unknown place `{0}` in marking predicate")]
    UnknownPlace(String),
    #[error("malformed marking predicate `{0}`")]
    BadPredicate(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    AtLeast,
    AtMost,
    Exactly,
}

/// One `place op count` condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceCondition {
    pub place: String,
    pub op: Comparison,
    pub count: u32,
}

/// Conjunction of place conditions; the empty predicate accepts everything.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarkingPredicate {
    pub conditions: Vec<PlaceCondition>,
}

impl MarkingPredicate {
    /// Parses `place>=n`, `place<=n`, `place=n` conditions separated by
    /// commas or `&&`.
    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        let bad = || AnalysisError::BadPredicate(text.to_string());
        let mut conditions = Vec::new();
        for part in text.split(',').flat_map(|s| s.split("&&")) {
            let part = part.trim();
            if part.is_empty() {
                return Err(bad());
            }
            let (place, op, rest) = if let Some((p, r)) = part.split_once(">=") {
                (p, Comparison::AtLeast, r)
            } else if let Some((p, r)) = part.split_once("<=") {
                (p, Comparison::AtMost, r)
            } else if let Some((p, r)) = part.split_once('=') {
                (p, Comparison::Exactly, r)
            } else {
                return Err(bad());
            };
            let place = place.trim();
            if place.is_empty() {
                return Err(bad());
            }
            let count = rest.trim().parse().map_err(|_| bad())?;
            conditions.push(PlaceCondition {
                place: place.to_string(),
                op,
                count,
            });
        }
        Ok(MarkingPredicate { conditions })
    }

    fn resolve(&self, net: &Net) -> Result<Vec<(PlaceId, Comparison, u32)>, AnalysisError> {
        self.conditions
            .iter()
            .map(|c| {
                net.place(&c.place)
                    .map(|p| (p, c.op, c.count))
                    .ok_or_else(|| AnalysisError::UnknownPlace(c.place.clone()))
            })
            .collect()
    }

    pub fn holds(&self, net: &Net, m: &Marking) -> Result<bool, AnalysisError> {
        Ok(eval(&self.resolve(net)?, m))
    }
}

fn eval(conds: &[(PlaceId, Comparison, u32)], m: &Marking) -> bool {
    conds.iter().all(|&(p, op, n)| {
        let have = m.tokens(p);
        match op {
            Comparison::AtLeast => have >= n,
            Comparison::AtMost => have <= n,
            Comparison::Exactly => have == n,
        }
    })
}

impl fmt::Display for MarkingPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .conditions
            .iter()
            .map(|c| {
                let op = match c.op {
                    Comparison::AtLeast => ">=",
                    Comparison::AtMost => "<=",
                    Comparison::Exactly => "=",
                };
                format!("{}{}{}", c.place, op, c.count)
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Which events and terminal markings count as legitimate outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AcceptanceSpec {
    pub success_label: Option<String>,
    pub timeout_label: Option<String>,
    pub accepting: MarkingPredicate,
}

impl AcceptanceSpec {
    /// Checks the labels against the model's alphabet.
    pub fn check(&self, net: &Net) -> Result<(), AnalysisError> {
        let alphabet = net.alphabet();
        for l in self.success_label.iter().chain(&self.timeout_label) {
            if !alphabet.contains(l) {
                return Err(AnalysisError::UnknownLabel(l.clone()));
            }
        }
        self.accepting.resolve(net).map(|_| ())
    }
}

/// One firing along a path of the class graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub source: usize,
    pub target: usize,
    pub set: usize,
    pub label: Option<String>,
    pub members: Vec<String>,
}

pub type Trace = Vec<TraceStep>;

fn step(g: &ScGraph, e: &Edge) -> TraceStep {
    TraceStep {
        source: e.source,
        target: e.target,
        set: e.set,
        label: g.edge_label(e).map(str::to_string),
        members: g.edge_members(e).into_iter().map(str::to_string).collect(),
    }
}

/// Dead classes split by the accepting predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeadClasses {
    pub accepting: Vec<usize>,
    pub timelocked: Vec<usize>,
}

pub fn find_dead_classes(g: &ScGraph, spec: &AcceptanceSpec) -> Result<DeadClasses, AnalysisError> {
    if !g.is_complete() {
        return Err(AnalysisError::PartialGraph);
    }
    let conds = spec.accepting.resolve(g.ptpn().net())?;
    let adj = g.adjacency();
    let mut out = DeadClasses::default();
    for (i, c) in g.classes().iter().enumerate() {
        if adj[i].is_empty() {
            if eval(&conds, &c.marking) {
                out.accepting.push(i);
            } else {
                out.timelocked.push(i);
            }
        }
    }
    Ok(out)
}

/// Breadth-first search from class 0 over edges accepted by `usable`.
/// Returns, per class, the edge used to reach it first.
fn bfs_tree(g: &ScGraph, adj: &[Vec<usize>], usable: impl Fn(&Edge) -> bool) -> Vec<Option<usize>> {
    bfs_with_depth(g, adj, usable).0
}

/// Like [`bfs_tree`], also returning each class's distance (`usize::MAX`
/// when unreachable).
fn bfs_with_depth(
    g: &ScGraph,
    adj: &[Vec<usize>],
    usable: impl Fn(&Edge) -> bool,
) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = g.classes().len();
    let mut parent = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    if n == 0 {
        return (parent, depth);
    }
    depth[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(c) = queue.pop_front() {
        for &ei in &adj[c] {
            let e = &g.edges()[ei];
            if usable(e) && depth[e.target] == usize::MAX {
                depth[e.target] = depth[c] + 1;
                parent[e.target] = Some(ei);
                queue.push_back(e.target);
            }
        }
    }
    (parent, depth)
}

fn path_to(g: &ScGraph, parent: &[Option<usize>], mut c: usize) -> Trace {
    let mut edges = Vec::new();
    while let Some(ei) = parent[c] {
        edges.push(ei);
        c = g.edges()[ei].source;
    }
    edges.iter().rev().map(|&ei| step(g, &g.edges()[ei])).collect()
}

/// Shortest path from class 0 to `target`, if reachable.
pub fn shortest_path(g: &ScGraph, target: usize) -> Option<Trace> {
    let adj = g.adjacency();
    let parent = bfs_tree(g, &adj, |_| true);
    (target == 0 || parent.get(target).copied().flatten().is_some()).then(|| path_to(g, &parent, target))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reachability {
    pub reachable: bool,
    /// Shortest path whose last firing carries the label.
    pub witness: Option<Trace>,
}

/// Whether some firing labelled `label` is reachable from class 0.
pub fn event_reachable(g: &ScGraph, label: &str) -> Reachability {
    let adj = g.adjacency();
    let (parent, depth) = bfs_with_depth(g, &adj, |_| true);
    let mut best: Option<(usize, usize)> = None;
    for (ei, e) in g.edges().iter().enumerate() {
        let d = depth[e.source];
        if g.edge_label(e) != Some(label) || d == usize::MAX {
            continue;
        }
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, ei));
        }
    }
    match best {
        Some((_, ei)) => {
            let e = &g.edges()[ei];
            let mut trace = path_to(g, &parent, e.source);
            trace.push(step(g, e));
            Reachability {
                reachable: true,
                witness: Some(trace),
            }
        }
        None => Reachability {
            reachable: false,
            witness: None,
        },
    }
}

/// How a run can avoid the event forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    /// A path to a dead class.
    DeadEnd(Trace),
    /// A path followed by a cycle returning to the cycle's first class.
    Lasso { stem: Trace, cycle: Trace },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inevitability {
    pub inevitable: bool,
    pub counterexample: Option<Counterexample>,
}

/// Whether every maximal run from class 0 fires `label`.
///
/// Runs are followed in the graph with `label` edges removed. The event is
/// inevitable when no dead class (dead in the full graph) and no cycle is
/// reachable there.
pub fn event_inevitable(g: &ScGraph, label: &str) -> Result<Inevitability, AnalysisError> {
    if !g.is_complete() {
        return Err(AnalysisError::PartialGraph);
    }
    let adj = g.adjacency();
    let avoid = |e: &Edge| g.edge_label(e) != Some(label);
    let parent = bfs_tree(g, &adj, avoid);
    let reached = |c: usize| c == 0 || parent[c].is_some();
    let n = g.classes().len();
    if let Some(dead) = (0..n).find(|&c| reached(c) && adj[c].is_empty()) {
        return Ok(Inevitability {
            inevitable: false,
            counterexample: Some(Counterexample::DeadEnd(path_to(g, &parent, dead))),
        });
    }
    // iterative DFS over the label-free subgraph looking for a back edge
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; n];
    let mut on_path: Vec<usize> = Vec::new();
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    mark[0] = Mark::Grey;
    while let Some(&mut (c, ref mut pos)) = stack.last_mut() {
        if let Some(&ei) = adj[c].get(*pos) {
            *pos += 1;
            let e = &g.edges()[ei];
            if !avoid(e) {
                continue;
            }
            match mark[e.target] {
                Mark::White => {
                    mark[e.target] = Mark::Grey;
                    on_path.push(ei);
                    stack.push((e.target, 0));
                }
                Mark::Grey => {
                    let start = on_path
                        .iter()
                        .position(|&pe| g.edges()[pe].source == e.target)
                        .unwrap_or(on_path.len());
                    let stem = on_path[..start].iter().map(|&pe| step(g, &g.edges()[pe])).collect();
                    let mut cycle: Trace = on_path[start..].iter().map(|&pe| step(g, &g.edges()[pe])).collect();
                    cycle.push(step(g, e));
                    return Ok(Inevitability {
                        inevitable: false,
                        counterexample: Some(Counterexample::Lasso { stem, cycle }),
                    });
                }
                Mark::Black => {}
            }
        } else {
            mark[c] = Mark::Black;
            stack.pop();
            on_path.pop();
        }
    }
    Ok(Inevitability {
        inevitable: true,
        counterexample: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VerdictKind {
    Success,
    TimeOut,
    TimeLock,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Success => "Success",
            VerdictKind::TimeOut => "TimeOut",
            VerdictKind::TimeLock => "TimeLock",
            VerdictKind::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Present for TimeOut and TimeLock.
    pub witness: Option<Trace>,
}

/// Classifies a complete graph. A reachable timeout wins over a timelock,
/// which wins over success; anything else is inconclusive.
pub fn verdict(g: &ScGraph, spec: &AcceptanceSpec) -> Result<Verdict, AnalysisError> {
    if !g.is_complete() {
        return Err(AnalysisError::PartialGraph);
    }
    spec.check(g.ptpn().net())?;
    if let Some(t) = &spec.timeout_label {
        let r = event_reachable(g, t);
        if r.reachable {
            return Ok(Verdict {
                kind: VerdictKind::TimeOut,
                witness: r.witness,
            });
        }
    }
    let dead = find_dead_classes(g, spec)?;
    if let Some(&c) = dead.timelocked.first() {
        return Ok(Verdict {
            kind: VerdictKind::TimeLock,
            witness: shortest_path(g, c),
        });
    }
    if let Some(s) = &spec.success_label {
        if event_inevitable(g, s)?.inevitable {
            return Ok(Verdict {
                kind: VerdictKind::Success,
                witness: None,
            });
        }
    }
    Ok(Verdict {
        kind: VerdictKind::Inconclusive,
        witness: None,
    })
}

/// Follows `trace` from class 0 through the graph's edges; returns the
/// class reached, or `None` if some step does not match an edge.
pub fn replay(g: &ScGraph, trace: &[TraceStep]) -> Option<usize> {
    let mut at = 0;
    for s in trace {
        let ok = s.source == at
            && g
                .edges()
                .iter()
                .any(|e| e.source == at && e.set == s.set && e.target == s.target);
        if !ok {
            return None;
        }
        at = s.target;
    }
    Some(at)
}
