//! Brute-force discrete-time semantics.
//!
//! For nets whose intervals are closed with integer endpoints, states are a
//! marking plus one integer clock per transition. Time advances in unit
//! ticks, allowed only while every enabled transition stays within its upper
//! bound. A firing set fires when each member's clock has reached its lower
//! bound.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::model::{Marking, Ptpn, TransitionId};
use crate::product::SyncLabelSet;
use crate::time::Bound;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("transition `{0}` has an interval that is not closed with integer endpoints")]
    UnsupportedIntervals(String),
}

/// One observable step of a timed trace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceSymbol {
    Tick,
    Label(String),
}

pub type TimedTrace = Vec<TraceSymbol>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum total elapsed time.
    pub horizon: u32,
    /// Maximum number of labelled events in a trace.
    pub max_events: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// Markings reachable within the horizon.
    pub markings: BTreeSet<Marking>,
    /// Prefix-closed set of timed label traces within the limits; silent
    /// firings are not recorded.
    pub traces: BTreeSet<TimedTrace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct State {
    marking: Marking,
    clocks: Vec<u32>,
}

struct Semantics<'a> {
    p: &'a Ptpn,
    lower: Vec<u32>,
    upper: Vec<Option<u32>>,
}

impl<'a> Semantics<'a> {
    fn new(p: &'a Ptpn) -> Result<Self, OracleError> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for t in p.net().transitions() {
            let unsupported = || OracleError::UnsupportedIntervals(t.name.clone());
            if !t.interval.is_closed_integer() {
                return Err(unsupported());
            }
            lower.push(t.interval.lower().to_integer().to_u32().ok_or_else(unsupported)?);
            upper.push(match t.interval.upper() {
                Bound::Finite { value, .. } => Some(value.to_integer().to_u32().ok_or_else(unsupported)?),
                Bound::Infinite => None,
            });
        }
        Ok(Semantics { p, lower, upper })
    }

    fn initial(&self) -> State {
        State {
            marking: self.p.net().initial_marking().clone(),
            clocks: vec![0; self.lower.len()],
        }
    }

    fn tick(&self, s: &State) -> Option<State> {
        let net = self.p.net();
        let mut clocks = s.clocks.clone();
        for t in net.transition_ids() {
            if !net.is_enabled(&s.marking, t) {
                continue;
            }
            let c = &mut clocks[t.0];
            match self.upper[t.0] {
                Some(u) if *c + 1 > u => return None,
                Some(_) => *c += 1,
                // only whether the lower bound was reached matters
                None => *c = (*c + 1).min(self.lower[t.0]),
            }
        }
        Some(State {
            marking: s.marking.clone(),
            clocks,
        })
    }

    /// Firings available from `s`: label and successor state.
    fn fire(&self, s: &State) -> Vec<(Option<&'a str>, State)> {
        let net = self.p.net();
        let mut out = Vec::new();
        for set in self.p.relation().sets() {
            let ready = set
                .members()
                .iter()
                .all(|&t| net.is_enabled(&s.marking, t) && s.clocks[t.0] >= self.lower[t.0]);
            if !ready {
                continue;
            }
            let firing = net.fire(&s.marking, set.members()).expect("members are enabled");
            let mut clocks = vec![0; self.lower.len()];
            for &TransitionId(k) in &firing.persistent {
                clocks[k] = s.clocks[k];
            }
            out.push((
                set.label(net),
                State {
                    marking: firing.marking,
                    clocks,
                },
            ));
        }
        out
    }

    /// States reachable from `seeds` through silent firings only.
    fn silent_closure(&self, seeds: HashSet<State>) -> HashSet<State> {
        let mut seen = seeds;
        let mut queue: VecDeque<State> = seen.iter().cloned().collect();
        while let Some(s) = queue.pop_front() {
            for (label, next) in self.fire(&s) {
                if label.is_none() && seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }
}

/// Reachable markings within `limits.horizon` time units and bounded timed
/// traces, computed by explicit enumeration.
pub fn discrete_time_oracle(p: &Ptpn, limits: OracleLimits) -> Result<OracleResult, OracleError> {
    let sem = Semantics::new(p)?;
    Ok(OracleResult {
        markings: reachable_markings(&sem, limits.horizon),
        traces: timed_traces(&sem, limits),
    })
}

/// 0-1 breadth-first search: each state is settled at its earliest time.
fn reachable_markings(sem: &Semantics<'_>, horizon: u32) -> BTreeSet<Marking> {
    let init = sem.initial();
    let mut best: HashMap<State, u32> = HashMap::from([(init.clone(), 0)]);
    let mut queue = VecDeque::from([(init, 0u32)]);
    while let Some((s, t)) = queue.pop_front() {
        if best.get(&s).is_some_and(|&b| b < t) {
            continue;
        }
        for (_, next) in sem.fire(&s) {
            if best.get(&next).is_none_or(|&b| t < b) {
                best.insert(next.clone(), t);
                queue.push_front((next, t));
            }
        }
        if t < horizon {
            if let Some(next) = sem.tick(&s) {
                if best.get(&next).is_none_or(|&b| t + 1 < b) {
                    best.insert(next.clone(), t + 1);
                    queue.push_back((next, t + 1));
                }
            }
        }
    }
    best.into_keys().map(|s| s.marking).collect()
}

fn timed_traces(sem: &Semantics<'_>, limits: OracleLimits) -> BTreeSet<TimedTrace> {
    let mut out = BTreeSet::new();
    let start = sem.silent_closure(HashSet::from([sem.initial()]));
    let mut work = vec![(Vec::new(), start, 0u32, 0usize)];
    while let Some((trace, states, ticks, events)) = work.pop() {
        let mut by_symbol: HashMap<TraceSymbol, HashSet<State>> = HashMap::new();
        for s in &states {
            if ticks < limits.horizon {
                if let Some(n) = sem.tick(s) {
                    by_symbol.entry(TraceSymbol::Tick).or_default().insert(n);
                }
            }
            if events < limits.max_events {
                for (label, n) in sem.fire(s) {
                    if let Some(l) = label {
                        by_symbol.entry(TraceSymbol::Label(l.to_string())).or_default().insert(n);
                    }
                }
            }
        }
        for (sym, next) in by_symbol {
            let mut t = trace.clone();
            let (ticks, events) = match sym {
                TraceSymbol::Tick => (ticks + 1, events),
                TraceSymbol::Label(_) => (ticks, events + 1),
            };
            t.push(sym);
            work.push((t, sem.silent_closure(next), ticks, events));
        }
        out.insert(trace);
    }
    out
}

/// Synchronous product of two prefix-closed trace sets: ticks and labels in
/// `labels` are taken jointly, other labels by either side alone. Results
/// are limited to `max_events` labels.
pub fn sync_traces(
    a: &BTreeSet<TimedTrace>,
    b: &BTreeSet<TimedTrace>,
    labels: &SyncLabelSet,
    max_events: usize,
) -> BTreeSet<TimedTrace> {
    let symbols = |set: &BTreeSet<TimedTrace>| -> BTreeSet<TraceSymbol> { set.iter().flatten().cloned().collect() };
    let (sa, sb) = (symbols(a), symbols(b));
    let mut out = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut work = vec![(Vec::new(), Vec::new(), Vec::new(), 0usize)];
    while let Some((u, v, w, events)) = work.pop() {
        if !seen.insert((u.clone(), v.clone(), w.clone())) {
            continue;
        }
        let extend = |x: &Vec<TraceSymbol>, s: &TraceSymbol| {
            let mut y = x.clone();
            y.push(s.clone());
            y
        };
        for sym in sa.union(&sb) {
            let joint = match sym {
                TraceSymbol::Tick => true,
                TraceSymbol::Label(l) => labels.contains(l),
            };
            let is_event = matches!(sym, TraceSymbol::Label(_));
            if is_event && events >= max_events {
                continue;
            }
            let events = events + usize::from(is_event);
            let (ua, vb) = (extend(&u, sym), extend(&v, sym));
            if joint {
                if a.contains(&ua) && b.contains(&vb) {
                    work.push((ua, vb, extend(&w, sym), events));
                }
            } else {
                if a.contains(&ua) {
                    work.push((ua, v.clone(), extend(&w, sym), events));
                }
                if b.contains(&vb) {
                    work.push((u.clone(), vb, extend(&w, sym), events));
                }
            }
        }
        out.insert(w);
    }
    out
}
