//! State class graph construction.
//!
//! A class pairs a marking with a canonical DBM over the firing times of the
//! enabled transitions (variable `i ≥ 1` is the `i`-th enabled transition in
//! declaration order). A firing set can fire first when its members can fire
//! at a common instant no later than any other enabled transition.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use indexmap::IndexSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::dbm::Dbm;
use crate::model::{FiringSet, Marking, Ptpn, TransitionId};
use crate::time::Bound;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScgError {
    #[error("firing set #{0} cannot fire from this class")]
    NotFirable(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateClass {
    pub marking: Marking,
    /// Enabled transitions, sorted; variable `i + 1` of `domain`.
    pub enabled: Vec<TransitionId>,
    pub domain: Dbm,
}

impl StateClass {
    fn var(&self, t: TransitionId) -> Option<usize> {
        self.enabled.binary_search(&t).ok().map(|i| i + 1)
    }
}

/// Two canonical classes denote the same set of states.
pub fn class_equal(a: &StateClass, b: &StateClass) -> bool {
    a == b
}

/// Static-interval bounds for transition `t` as a fresh variable.
fn static_bounds(p: &Ptpn, t: TransitionId) -> (Bound, Bound) {
    let iv = p.net().transition(t).interval;
    (iv.upper(), iv.neg_lower_bound())
}

pub fn initial_class(p: &Ptpn) -> StateClass {
    let net = p.net();
    let marking = net.initial_marking().clone();
    let enabled = net.enabled(&marking);
    let mut domain = Dbm::unconstrained(enabled.len() + 1);
    for (i, &t) in enabled.iter().enumerate() {
        let (up, neg_low) = static_bounds(p, t);
        domain.set(i + 1, 0, up);
        domain.set(0, i + 1, neg_low);
    }
    let domain = domain
        .canonicalize()
        .expect("static intervals are non-empty");
    StateClass {
        marking,
        enabled,
        domain,
    }
}

/// The class domain constrained so that every member of `set` fires first,
/// all at the same instant. `None` when that is impossible.
fn firing_domain(c: &StateClass, set: &FiringSet) -> Option<Dbm> {
    let mut d = c.domain.clone();
    for &t in set.members() {
        let vt = c.var(t)?;
        for k in 1..d.dim() {
            d.constrain(vt, k, Bound::ZERO);
        }
        if !d.close_row(vt) {
            return None;
        }
    }
    Some(d)
}

/// Indices (into the relation) of the firing sets that can fire from `c`.
pub fn firable_firing_sets(c: &StateClass, p: &Ptpn) -> Vec<usize> {
    let net = p.net();
    p.relation()
        .sets()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.members().iter().all(|&t| net.is_enabled(&c.marking, t)))
        .filter(|(_, s)| firing_domain(c, s).is_some())
        .map(|(i, _)| i)
        .collect()
}

/// Class reached by firing relation set `set_index` from `c`.
pub fn successor_class(c: &StateClass, set_index: usize, p: &Ptpn) -> Result<StateClass, ScgError> {
    let set = &p.relation().sets()[set_index];
    let not_firable = || ScgError::NotFirable(set_index);
    if !set.members().iter().all(|&t| p.net().is_enabled(&c.marking, t)) {
        return Err(not_firable());
    }
    let d = firing_domain(c, set).ok_or_else(not_firable)?;
    Ok(successor_from_domain(c, set, &d, p))
}

fn successor_from_domain(c: &StateClass, set: &FiringSet, d: &Dbm, p: &Ptpn) -> StateClass {
    let net = p.net();
    let firing = net
        .fire(&c.marking, set.members())
        .expect("members are enabled");
    let f = c.var(set.members()[0]).expect("member is enabled");
    let enabled = net.enabled(&firing.marking);
    // old variable index for persistent transitions, None for fresh ones
    let origin: Vec<Option<usize>> = enabled
        .iter()
        .map(|t| {
            firing
                .persistent
                .binary_search(t)
                .ok()
                .map(|_| c.var(*t).expect("persistent was enabled"))
        })
        .collect();
    let n = enabled.len() + 1;
    let mut out = Dbm::unconstrained(n);
    // upper (x_i − x0') and negated lower (x0' − x_i) of every new variable
    let mut up = vec![Bound::ZERO; n];
    let mut down = vec![Bound::ZERO; n];
    for (i, (&t, o)) in enabled.iter().zip(&origin).enumerate() {
        let v = i + 1;
        match *o {
            Some(k) => {
                up[v] = d.get(k, f);
                down[v] = d.get(f, k);
            }
            None => {
                let (u, l) = static_bounds(p, t);
                up[v] = u;
                down[v] = l;
            }
        }
        out.set(v, 0, up[v]);
        out.set(0, v, down[v]);
    }
    for i in 1..n {
        for j in 1..n {
            if i == j {
                continue;
            }
            let b = match (origin[i - 1], origin[j - 1]) {
                (Some(k), Some(l)) => d.get(k, l),
                _ => up[i] + down[j],
            };
            out.set(i, j, b);
        }
    }
    StateClass {
        marking: firing.marking,
        enabled,
        domain: out,
    }
}

/// All successors of `c`: `(set index, class)` in relation order.
pub fn successors(c: &StateClass, p: &Ptpn) -> Vec<(usize, StateClass)> {
    let net = p.net();
    p.relation()
        .sets()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.members().iter().all(|&t| net.is_enabled(&c.marking, t)))
        .filter_map(|(i, s)| firing_domain(c, s).map(|d| (i, successor_from_domain(c, s, &d, p))))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchOrder {
    #[default]
    BreadthFirst,
    DepthFirst,
}

#[derive(Clone, Debug, Default)]
pub struct ExploreOptions {
    pub max_classes: Option<usize>,
    pub time_budget: Option<Duration>,
    pub order: SearchOrder,
    /// Expand each breadth-first level in parallel. The result is identical
    /// to sequential breadth-first exploration.
    pub parallel: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    MaxClasses,
    TimeBudget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    /// Exploration stopped early; `frontier` lists classes whose successors
    /// were not computed.
    Partial { limit: LimitKind, frontier: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    /// Index into the relation of the explored model.
    pub set: usize,
    pub target: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScgStats {
    pub classes: usize,
    pub markings: usize,
    /// Distinct (enabled transitions, canonical domain) pairs.
    pub domains: usize,
    pub edges: usize,
}

#[derive(Clone, Debug)]
pub struct ScGraph {
    ptpn: Ptpn,
    classes: Vec<StateClass>,
    edges: Vec<Edge>,
    completeness: Completeness,
    elapsed: Duration,
}

impl ScGraph {
    pub fn ptpn(&self) -> &Ptpn {
        &self.ptpn
    }

    pub fn classes(&self) -> &[StateClass] {
        &self.classes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn completeness(&self) -> &Completeness {
        &self.completeness
    }

    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Complete
    }

    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    /// Label of an edge; `None` for silent firings.
    pub fn edge_label(&self, e: &Edge) -> Option<&str> {
        self.ptpn.relation().sets()[e.set].label(self.ptpn.net())
    }

    pub fn edge_members(&self, e: &Edge) -> Vec<&str> {
        self.ptpn.relation().sets()[e.set].names(self.ptpn.net())
    }

    /// Outgoing edges per class, in edge order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.classes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.source].push(i);
        }
        adj
    }

    pub fn stats(&self) -> ScgStats {
        let markings: HashSet<&Marking> = self.classes.iter().map(|c| &c.marking).collect();
        let domains: HashSet<(&[TransitionId], &Dbm)> = self
            .classes
            .iter()
            .map(|c| (c.enabled.as_slice(), &c.domain))
            .collect();
        ScgStats {
            classes: self.classes.len(),
            markings: markings.len(),
            domains: domains.len(),
            edges: self.edges.len(),
        }
    }
}

struct Explorer<'a> {
    p: &'a Ptpn,
    opts: &'a ExploreOptions,
    start: Instant,
    classes: IndexSet<StateClass>,
    edges: Vec<Edge>,
}

impl Explorer<'_> {
    fn limit_hit(&self) -> Option<LimitKind> {
        if let Some(b) = self.opts.time_budget {
            if self.start.elapsed() > b {
                return Some(LimitKind::TimeBudget);
            }
        }
        None
    }

    /// Records the successors of `source`; returns indices of new classes,
    /// or `Err` when the class limit would be exceeded.
    fn absorb(&mut self, source: usize, succ: Vec<(usize, StateClass)>) -> Result<Vec<usize>, LimitKind> {
        let max = self.opts.max_classes.unwrap_or(usize::MAX);
        let fresh_needed = succ.iter().filter(|(_, c)| !self.classes.contains(c)).count();
        if self.classes.len() + fresh_needed > max {
            return Err(LimitKind::MaxClasses);
        }
        let mut fresh = Vec::new();
        for (set, class) in succ {
            let (target, new) = self.classes.insert_full(class);
            if new {
                fresh.push(target);
            }
            self.edges.push(Edge { source, set, target });
        }
        Ok(fresh)
    }

    fn finish(self, completeness: Completeness) -> ScGraph {
        ScGraph {
            ptpn: self.p.clone(),
            classes: self.classes.into_iter().collect(),
            edges: self.edges,
            completeness,
            elapsed: self.start.elapsed(),
        }
    }
}

/// Explores the state class graph of `p` from its initial class.
pub fn build_scg(p: &Ptpn, opts: &ExploreOptions) -> ScGraph {
    let mut ex = Explorer {
        p,
        opts,
        start: Instant::now(),
        classes: IndexSet::new(),
        edges: Vec::new(),
    };
    ex.classes.insert(initial_class(p));
    let partial = |limit, frontier| Completeness::Partial { limit, frontier };
    match (opts.order, opts.parallel) {
        (SearchOrder::BreadthFirst, false) => {
            let mut next = 0;
            while next < ex.classes.len() {
                if let Some(l) = ex.limit_hit() {
                    let frontier = (next..ex.classes.len()).collect();
                    return ex.finish(partial(l, frontier));
                }
                let succ = successors(&ex.classes[next], p);
                if let Err(l) = ex.absorb(next, succ) {
                    let frontier = (next..ex.classes.len()).collect();
                    return ex.finish(partial(l, frontier));
                }
                next += 1;
            }
        }
        (SearchOrder::BreadthFirst, true) => {
            let mut level = 0..1;
            while !level.is_empty() {
                if let Some(l) = ex.limit_hit() {
                    let frontier = (level.start..ex.classes.len()).collect();
                    return ex.finish(partial(l, frontier));
                }
                let succs: Vec<_> = {
                    let classes = &ex.classes;
                    level
                        .clone()
                        .into_par_iter()
                        .map(|i| successors(&classes[i], p))
                        .collect()
                };
                let end = ex.classes.len();
                for (i, succ) in level.clone().zip(succs) {
                    if let Err(l) = ex.absorb(i, succ) {
                        let frontier = (i..ex.classes.len()).collect();
                        return ex.finish(partial(l, frontier));
                    }
                }
                level = end..ex.classes.len();
            }
        }
        (SearchOrder::DepthFirst, _) => {
            let mut stack = vec![0];
            while let Some(i) = stack.pop() {
                if let Some(l) = ex.limit_hit() {
                    stack.push(i);
                    return ex.finish(partial(l, stack));
                }
                let succ = successors(&ex.classes[i], p);
                match ex.absorb(i, succ) {
                    Ok(fresh) => stack.extend(fresh.into_iter().rev()),
                    Err(l) => {
                        stack.push(i);
                        return ex.finish(partial(l, stack));
                    }
                }
            }
        }
    }
    ex.finish(Completeness::Complete)
}
