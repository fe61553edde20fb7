//! Nets, markings, labels, firing sets and product relations, with the
//! marking-level firing rule.
//!
//! Places and transitions are identified by name and stored in declaration
//! order; the order is fixed once a [`Net`] is built so every downstream
//! output is deterministic.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::time::TimeInterval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate place `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(String),
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("arc weight must be at least 1 (transition `{transition}`, place `{place}`)")]
    ZeroWeight { transition: String, place: String },
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("invalid firing set: {0}")]
    InvalidFiringSet(#[from] FiringSetViolation),
}

/// Why a set of transitions cannot fire together.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiringSetViolation {
    #[error("firing set is empty")]
    Empty,
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("`{0}` and `{1}` carry different labels")]
    LabelMismatch(String, String),
    #[error("`{first}` and `{second}` both consume from place `{place}`")]
    SharedInputPlace {
        place: String,
        first: String,
        second: String,
    },
    #[error("silent transition `{0}` cannot synchronise with others")]
    SilentMember(String),
}

/// Token counts indexed by place, compared pointwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn new(tokens: Vec<u32>) -> Self {
        Marking(tokens)
    }

    pub fn empty(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn tokens(&self, p: PlaceId) -> u32 {
        self.0[p.0]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise `self ≥ other`.
    pub fn covers(&self, other: &Marking) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    fn covers_arcs(&self, arcs: &[(PlaceId, u32)]) -> bool {
        arcs.iter().all(|&(p, w)| self.0[p.0] >= w)
    }
}

/// A transition with its arcs, label (`None` is the silent label) and
/// static interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub label: Option<String>,
    pub interval: TimeInterval,
    /// Input arcs, sorted by place, weights ≥ 1.
    pub pre: Vec<(PlaceId, u32)>,
    /// Output arcs, sorted by place, weights ≥ 1.
    pub post: Vec<(PlaceId, u32)>,
}

impl Transition {
    pub fn consumes_from(&self, p: PlaceId) -> bool {
        self.pre.iter().any(|&(q, _)| q == p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    name: String,
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial: Marking,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
}

impl Net {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn place(&self, name: &str) -> Option<PlaceId> {
        self.place_index.get(name).copied()
    }

    pub fn transition_id(&self, name: &str) -> Option<TransitionId> {
        self.transition_index.get(name).copied()
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn label(&self, t: TransitionId) -> Option<&str> {
        self.transitions[t.0].label.as_deref()
    }

    /// Labels carried by the net's transitions (silent excluded).
    pub fn alphabet(&self) -> BTreeSet<String> {
        self.transitions
            .iter()
            .filter_map(|t| t.label.clone())
            .collect()
    }

    /// Marking built from `(place, tokens)` pairs; unlisted places hold 0.
    pub fn marking(&self, tokens: &[(&str, u32)]) -> Result<Marking, ModelError> {
        let mut m = Marking::empty(self.places.len());
        for &(name, n) in tokens {
            let p = self
                .place(name)
                .ok_or_else(|| ModelError::UnknownPlace(name.to_string()))?;
            m.0[p.0] = n;
        }
        Ok(m)
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        m.covers_arcs(&self.transitions[t.0].pre)
    }

    /// Every transition `t` with `m ≥ Pre(t)`, in declaration order.
    pub fn enabled(&self, m: &Marking) -> Vec<TransitionId> {
        self.transition_ids()
            .filter(|&t| self.is_enabled(m, t))
            .collect()
    }

    /// Fires all members of `set` simultaneously from `m`.
    ///
    /// A transition `k ∉ set` is persistent when it is still enabled at the
    /// intermediate marking `m − Σ Pre(t)`; every other transition enabled
    /// at the result is newly enabled (including re-enabled members).
    pub fn fire(&self, m: &Marking, set: &[TransitionId]) -> Result<Firing, ModelError> {
        let mut intermediate = m.clone();
        for &t in set {
            for &(p, w) in &self.transitions[t.0].pre {
                let slot = &mut intermediate.0[p.0];
                if *slot < w {
                    return Err(ModelError::NotEnabled(self.transitions[t.0].name.clone()));
                }
                *slot -= w;
            }
        }
        let mut next = intermediate.clone();
        for &t in set {
            for &(p, w) in &self.transitions[t.0].post {
                next.0[p.0] += w;
            }
        }
        let mut persistent = Vec::new();
        let mut newly_enabled = Vec::new();
        for k in self.transition_ids() {
            if !self.is_enabled(&next, k) {
                continue;
            }
            if !set.contains(&k) && intermediate.covers_arcs(&self.transitions[k.0].pre) {
                persistent.push(k);
            } else {
                newly_enabled.push(k);
            }
        }
        Ok(Firing {
            marking: next,
            persistent,
            newly_enabled,
        })
    }

    /// Checks that `members` may form a firing set: one common label and
    /// pairwise disjoint input places.
    pub fn validate_firing_set(&self, members: &[TransitionId]) -> Result<(), FiringSetViolation> {
        if members.is_empty() {
            return Err(FiringSetViolation::Empty);
        }
        let name = |t: TransitionId| self.transitions[t.0].name.clone();
        let mut sorted = members.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.len() > 1 {
            if let Some(&t) = sorted.iter().find(|&&t| self.label(t).is_none()) {
                return Err(FiringSetViolation::SilentMember(name(t)));
            }
        }
        for (i, &a) in sorted.iter().enumerate() {
            for &b in &sorted[i + 1..] {
                if self.label(a) != self.label(b) {
                    return Err(FiringSetViolation::LabelMismatch(name(a), name(b)));
                }
                if let Some(&(p, _)) = self.transitions[a.0]
                    .pre
                    .iter()
                    .find(|&&(p, _)| self.transitions[b.0].consumes_from(p))
                {
                    return Err(FiringSetViolation::SharedInputPlace {
                        place: self.places[p.0].clone(),
                        first: name(a),
                        second: name(b),
                    });
                }
            }
        }
        Ok(())
    }

    /// Name-based variant of [`Net::validate_firing_set`].
    pub fn validate_firing_set_names<S: AsRef<str>>(
        &self,
        names: &[S],
    ) -> Result<(), FiringSetViolation> {
        let ids = names
            .iter()
            .map(|n| {
                self.transition_id(n.as_ref())
                    .ok_or_else(|| FiringSetViolation::UnknownTransition(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.validate_firing_set(&ids)
    }
}

/// Result of firing a set of transitions at the marking level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Firing {
    pub marking: Marking,
    pub persistent: Vec<TransitionId>,
    pub newly_enabled: Vec<TransitionId>,
}

/// Incremental construction of a [`Net`].
#[derive(Debug, Default)]
pub struct NetBuilder {
    name: String,
    places: Vec<String>,
    tokens: Vec<u32>,
    transitions: Vec<Transition>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
}

impl NetBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn place(&mut self, name: impl Into<String>, tokens: u32) -> Result<PlaceId, ModelError> {
        let name = name.into();
        if self.place_index.contains_key(&name) {
            return Err(ModelError::DuplicatePlace(name));
        }
        let id = PlaceId(self.places.len());
        self.place_index.insert(name.clone(), id);
        self.places.push(name);
        self.tokens.push(tokens);
        Ok(id)
    }

    pub fn place_id(&self, name: &str) -> Option<PlaceId> {
        self.place_index.get(name).copied()
    }

    /// Adds a transition; arcs are given by place name and weight.
    pub fn transition(
        &mut self,
        name: impl Into<String>,
        label: Option<&str>,
        interval: TimeInterval,
        pre: &[(&str, u32)],
        post: &[(&str, u32)],
    ) -> Result<TransitionId, ModelError> {
        let name = name.into();
        let pre = self.resolve_arcs(&name, pre)?;
        let post = self.resolve_arcs(&name, post)?;
        self.push_transition(Transition {
            name,
            label: label.map(str::to_string),
            interval,
            pre,
            post,
        })
    }

    fn resolve_arcs(&self, transition: &str, arcs: &[(&str, u32)]) -> Result<Vec<(PlaceId, u32)>, ModelError> {
        let ids = arcs
            .iter()
            .map(|&(p, w)| {
                let id = self
                    .place_id(p)
                    .ok_or_else(|| ModelError::UnknownPlace(p.to_string()))?;
                Ok((id, w))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        normalize_arcs(ids).map_err(|p| ModelError::ZeroWeight {
            transition: transition.to_string(),
            place: self.places[p.0].clone(),
        })
    }

    /// Adds a transition whose arcs already reference this builder's places.
    pub fn push_transition(&mut self, mut t: Transition) -> Result<TransitionId, ModelError> {
        if self.transition_index.contains_key(&t.name) {
            return Err(ModelError::DuplicateTransition(t.name));
        }
        for &(p, _) in t.pre.iter().chain(&t.post) {
            if p.0 >= self.places.len() {
                return Err(ModelError::UnknownPlace(format!("#{}", p.0)));
            }
        }
        let name = t.name.clone();
        t.pre = normalize_arcs(std::mem::take(&mut t.pre)).map_err(|p| ModelError::ZeroWeight {
            transition: name.clone(),
            place: self.places[p.0].clone(),
        })?;
        t.post = normalize_arcs(std::mem::take(&mut t.post)).map_err(|p| ModelError::ZeroWeight {
            transition: name.clone(),
            place: self.places[p.0].clone(),
        })?;
        let id = TransitionId(self.transitions.len());
        self.transition_index.insert(name, id);
        self.transitions.push(t);
        Ok(id)
    }

    pub fn build(self) -> Net {
        Net {
            name: self.name,
            places: self.places,
            transitions: self.transitions,
            initial: Marking(self.tokens),
            place_index: self.place_index,
            transition_index: self.transition_index,
        }
    }
}

/// Sorts arcs by place and merges repeated places by summing weights.
fn normalize_arcs(mut arcs: Vec<(PlaceId, u32)>) -> Result<Vec<(PlaceId, u32)>, PlaceId> {
    if let Some(&(p, _)) = arcs.iter().find(|&&(_, w)| w == 0) {
        return Err(p);
    }
    arcs.sort_by_key(|&(p, _)| p);
    let mut merged: Vec<(PlaceId, u32)> = Vec::with_capacity(arcs.len());
    for (p, w) in arcs {
        match merged.last_mut() {
            Some((q, v)) if *q == p => *v += w,
            _ => merged.push((p, w)),
        }
    }
    Ok(merged)
}

/// A non-empty set of transitions that fire at the same instant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiringSet(Vec<TransitionId>);

impl FiringSet {
    /// Builds and validates a firing set against `net`.
    pub fn new(net: &Net, members: impl IntoIterator<Item = TransitionId>) -> Result<Self, FiringSetViolation> {
        let mut members: Vec<_> = members.into_iter().collect();
        members.sort();
        members.dedup();
        net.validate_firing_set(&members)?;
        Ok(FiringSet(members))
    }

    pub fn singleton(t: TransitionId) -> Self {
        FiringSet(vec![t])
    }

    pub fn members(&self) -> &[TransitionId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Common label of the members; `None` for a silent set.
    pub fn label<'n>(&self, net: &'n Net) -> Option<&'n str> {
        net.label(self.0[0])
    }

    pub fn names<'n>(&self, net: &'n Net) -> Vec<&'n str> {
        self.0.iter().map(|&t| net.transition(t).name.as_str()).collect()
    }
}

/// The firing sets of a product net, in a fixed order without duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProductRelation(Vec<FiringSet>);

impl ProductRelation {
    pub fn new(sets: impl IntoIterator<Item = FiringSet>) -> Self {
        let mut seen = BTreeSet::new();
        ProductRelation(
            sets.into_iter()
                .filter(|s| seen.insert(s.clone()))
                .collect(),
        )
    }

    pub fn sets(&self) -> &[FiringSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, set: &FiringSet) -> bool {
        self.0.contains(set)
    }
}

/// A net together with its product relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ptpn {
    net: Net,
    relation: ProductRelation,
}

impl Ptpn {
    /// Pairs a net with a relation, validating every firing set against it.
    pub fn new(net: Net, relation: ProductRelation) -> Result<Self, ModelError> {
        for set in relation.sets() {
            if let Some(t) = set.members().iter().find(|t| t.0 >= net.transitions.len()) {
                return Err(ModelError::UnknownTransition(format!("#{}", t.0)));
            }
            net.validate_firing_set(set.members())?;
        }
        Ok(Ptpn { net, relation })
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn relation(&self) -> &ProductRelation {
        &self.relation
    }

    pub fn into_parts(self) -> (Net, ProductRelation) {
        (self.net, self.relation)
    }

    /// True when the relation is exactly one singleton per transition.
    pub fn is_lifted(&self) -> bool {
        self.relation.len() == self.net.transitions.len()
            && self
                .relation
                .sets()
                .iter()
                .zip(self.net.transition_ids())
                .all(|(s, t)| s.members() == [t])
    }
}

/// Views a plain time Petri net as a product net whose relation holds one
/// singleton per transition.
pub fn lift_to_ptpn(net: Net) -> Ptpn {
    let relation = ProductRelation(net.transition_ids().map(FiringSet::singleton).collect());
    Ptpn { net, relation }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Renders a marking as `p1 p2*3` (marked places only).
pub fn marking_summary(net: &Net, m: &Marking) -> String {
    let parts: Vec<String> = m
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, &n)| {
            if n == 1 {
                net.places[i].clone()
            } else {
                format!("{}*{}", net.places[i], n)
            }
        })
        .collect();
    if parts.is_empty() {
        "-".to_string()
    } else {
        parts.join(" ")
    }
}
