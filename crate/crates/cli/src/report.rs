//! Verdict and exploration reports in text and JSON.

use std::fmt::Write as _;
use std::time::Duration;

use ptpn::analysis::{AcceptanceSpec, Trace};
use ptpn::product::DroppedSet;
use ptpn::scg::{Completeness, LimitKind, ScgStats};
use ptpn::{ScGraph, Verdict, VerdictKind};
use serde::Serialize;

/// Process exit codes, stable across releases.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const ERROR: u8 = 1;
    pub const TIMEOUT: u8 = 2;
    pub const TIMELOCK: u8 = 3;
    pub const INCONCLUSIVE: u8 = 4;
    pub const PARTIAL: u8 = 5;
    pub const USAGE: u8 = 64;
}

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    pub classes: usize,
    pub markings: usize,
    pub domains: usize,
    pub transitions: usize,
}

impl From<ScgStats> for Stats {
    fn from(s: ScgStats) -> Self {
        Stats {
            classes: s.classes,
            markings: s.markings,
            domains: s.domains,
            transitions: s.edges,
        }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct ModelInfo {
    pub name: String,
    pub places: usize,
    pub transitions: usize,
    pub firing_sets: usize,
    pub dropped_sets: Vec<Dropped>,
}

#[derive(Serialize, Debug, Clone)]
pub struct Dropped {
    pub label: String,
    pub members: Vec<String>,
}

impl ModelInfo {
    pub fn new(g: &ScGraph, dropped: &[DroppedSet]) -> Self {
        let p = g.ptpn();
        ModelInfo {
            name: p.net().name().to_string(),
            places: p.net().places().len(),
            transitions: p.net().transitions().len(),
            firing_sets: p.relation().len(),
            dropped_sets: dropped
                .iter()
                .map(|d| Dropped { label: d.label.clone(), members: d.members.clone() })
                .collect(),
        }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct Step {
    pub source: usize,
    pub target: usize,
    pub label: Option<String>,
    pub members: Vec<String>,
}

#[derive(Serialize, Debug, Clone)]
pub struct SpecInfo {
    pub success_label: Option<String>,
    pub timeout_label: Option<String>,
    pub accepting: String,
}

#[derive(Serialize, Debug, Clone)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    MaxClasses,
    TimeBudget,
}

/// The `check` report. Its JSON form follows `schema/report.schema.json`.
#[derive(Serialize, Debug, Clone)]
pub struct Report {
    pub model: ModelInfo,
    pub spec: SpecInfo,
    /// `Success`, `TimeOut`, `TimeLock`, `Inconclusive` or `Partial`.
    pub verdict: String,
    pub complete: bool,
    pub limit: Option<Limit>,
    pub stats: Stats,
    pub elapsed_seconds: f64,
    pub witness: Option<Vec<Step>>,
    pub exit_code: u8,
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Limit::MaxClasses => "class limit",
            Limit::TimeBudget => "time budget",
        })
    }
}

fn limit_of(g: &ScGraph) -> Option<Limit> {
    match g.completeness() {
        Completeness::Complete => None,
        Completeness::Partial { limit: LimitKind::MaxClasses, .. } => Some(Limit::MaxClasses),
        Completeness::Partial { limit: LimitKind::TimeBudget, .. } => Some(Limit::TimeBudget),
    }
}

fn steps(trace: &Trace) -> Vec<Step> {
    trace
        .iter()
        .map(|s| Step { source: s.source, target: s.target, label: s.label.clone(), members: s.members.clone() })
        .collect()
}

pub fn verdict_exit(kind: VerdictKind) -> u8 {
    match kind {
        VerdictKind::Success => exit::SUCCESS,
        VerdictKind::TimeOut => exit::TIMEOUT,
        VerdictKind::TimeLock => exit::TIMELOCK,
        VerdictKind::Inconclusive => exit::INCONCLUSIVE,
    }
}

impl Report {
    /// `verdict` is `None` when the graph is partial.
    pub fn new(
        g: &ScGraph,
        dropped: &[DroppedSet],
        spec: &AcceptanceSpec,
        verdict: Option<&Verdict>,
        elapsed: Duration,
    ) -> Self {
        let (name, witness, exit_code) = match verdict {
            Some(v) => (v.kind.to_string(), v.witness.as_ref().map(steps), verdict_exit(v.kind)),
            None => ("Partial".to_string(), None, exit::PARTIAL),
        };
        Report {
            model: ModelInfo::new(g, dropped),
            spec: SpecInfo {
                success_label: spec.success_label.clone(),
                timeout_label: spec.timeout_label.clone(),
                accepting: spec.accepting.to_string(),
            },
            verdict: name,
            complete: g.is_complete(),
            limit: limit_of(g),
            stats: g.stats().into(),
            elapsed_seconds: elapsed.as_secs_f64(),
            witness,
            exit_code,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.stats;
        writeln!(out, "model: {}", self.model.name).unwrap();
        writeln!(out, "verdict: {}", self.verdict).unwrap();
        if let Some(limit) = &self.limit {
            writeln!(out, "exploration stopped by the {limit}; results are partial").unwrap();
        }
        writeln!(
            out,
            "classes: {}  markings: {}  domains: {}  transitions: {}",
            s.classes, s.markings, s.domains, s.transitions
        )
        .unwrap();
        writeln!(out, "time: {:.3}s", self.elapsed_seconds).unwrap();
        if let Some(w) = &self.witness {
            writeln!(out, "witness ({} steps):", w.len()).unwrap();
            for step in w {
                let label = step.label.as_deref().unwrap_or("tau");
                writeln!(out, "  c{} --{} {{{}}}--> c{}", step.source, label, step.members.join(","), step.target)
                    .unwrap();
            }
        }
        out
    }
}

/// Exploration summary for `explore`.
#[derive(Serialize, Debug, Clone)]
pub struct ExploreReport {
    pub model: ModelInfo,
    pub complete: bool,
    pub limit: Option<Limit>,
    pub frontier: usize,
    pub stats: Stats,
    pub elapsed_seconds: f64,
}

impl ExploreReport {
    pub fn new(g: &ScGraph, dropped: &[DroppedSet]) -> Self {
        let frontier = match g.completeness() {
            Completeness::Complete => 0,
            Completeness::Partial { frontier, .. } => frontier.len(),
        };
        ExploreReport {
            model: ModelInfo::new(g, dropped),
            complete: g.is_complete(),
            limit: limit_of(g),
            frontier,
            stats: g.stats().into(),
            elapsed_seconds: g.elapsed().as_secs_f64(),
        }
    }

    pub fn to_text(&self) -> String {
        let s = &self.stats;
        let mut out = format!(
            "model: {}\nclasses: {}  markings: {}  domains: {}  transitions: {}\ntime: {:.3}s\n",
            self.model.name, s.classes, s.markings, s.domains, s.transitions, self.elapsed_seconds
        );
        if let Some(limit) = &self.limit {
            writeln!(out, "partial: stopped by the {limit} with {} unexplored classes", self.frontier).unwrap();
        }
        out
    }
}
