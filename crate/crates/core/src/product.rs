//! Synchronous product of product nets.
//!
//! Nets are juxtaposed (places and transitions side by side, initial markings
//! concatenated) and relations are composed: sets carrying a synchronised
//! label pair up across operands, everything else is kept as is. Transitions
//! are never merged.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::model::{FiringSet, ModelError, NetBuilder, PlaceId, ProductRelation, Ptpn, Transition, TransitionId};
use crate::parser::{CompositionManifest, SyncPolicy};

#[derive(Debug, Error)]
pub enum ProductError {
    #[error("invalid operand: {0}")]
    InvalidOperand(#[from] ModelError),
    #[error("synchronisation label `{0}` is not carried by the operands")]
    UnknownSyncLabel(String),
    #[error("cannot load component `{path}`: {message}")]
    Load { path: String, message: String },
    #[error("composition needs at least one component")]
    NoComponents,
}

/// The labels on which two operands synchronise.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SyncLabelSet(BTreeSet<String>);

impl SyncLabelSet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        SyncLabelSet(labels.into_iter().map(Into::into).collect())
    }

    /// Labels carried by both operands.
    pub fn intersection(a: &Ptpn, b: &Ptpn) -> Self {
        let (la, lb) = (a.net().alphabet(), b.net().alphabet());
        SyncLabelSet(la.intersection(&lb).cloned().collect())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A firing set left out of the product because its synchronised label has
/// no counterpart in the other operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedSet {
    pub label: String,
    /// Member names as they appear in the product net.
    pub members: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ProductOutcome {
    pub ptpn: Ptpn,
    pub dropped: Vec<DroppedSet>,
}

/// Picks a fresh name for an entity present in both operands.
fn rename(name: &str, suffix: &str, clash: &HashSet<&str>, taken: &mut HashSet<String>) -> String {
    let mut out = name.to_string();
    if clash.contains(name) {
        out.push_str(suffix);
        while taken.contains(&out) {
            out.push_str(suffix);
        }
    }
    taken.insert(out.clone());
    out
}

fn name_maps<'a>(a: &'a [String], b: &'a [String]) -> (Vec<String>, Vec<String>) {
    let set_a: HashSet<&str> = a.iter().map(String::as_str).collect();
    let set_b: HashSet<&str> = b.iter().map(String::as_str).collect();
    let clash: HashSet<&str> = set_a.intersection(&set_b).copied().collect();
    // unclashed names are reserved first so suffixed names never shadow them
    let mut taken: HashSet<String> = a
        .iter()
        .chain(b)
        .filter(|n| !clash.contains(n.as_str()))
        .cloned()
        .collect();
    let ra = a.iter().map(|n| rename(n, ".1", &clash, &mut taken)).collect();
    let rb = b.iter().map(|n| rename(n, ".2", &clash, &mut taken)).collect();
    (ra, rb)
}

/// Computes `a × b` synchronised on `labels`.
///
/// Every label in `labels` must be carried by at least one operand.
pub fn binary_product(a: &Ptpn, b: &Ptpn, labels: &SyncLabelSet) -> Result<ProductOutcome, ProductError> {
    let (na, nb) = (a.net(), b.net());
    let union: BTreeSet<String> = na.alphabet().union(&nb.alphabet()).cloned().collect();
    if let Some(l) = labels.iter().find(|l| !union.contains(*l)) {
        return Err(ProductError::UnknownSyncLabel(l.to_string()));
    }

    let (places_a, places_b) = name_maps(na.places(), nb.places());
    let tnames = |n: &crate::model::Net| n.transitions().iter().map(|t| t.name.clone()).collect::<Vec<_>>();
    let (trans_a, trans_b) = name_maps(&tnames(na), &tnames(nb));

    let mut builder = NetBuilder::new(format!("{}_{}", na.name(), nb.name()));
    for (i, name) in places_a.into_iter().enumerate() {
        builder.place(name, na.initial_marking().tokens(PlaceId(i)))?;
    }
    let offset = na.places().len();
    for (i, name) in places_b.into_iter().enumerate() {
        builder.place(name, nb.initial_marking().tokens(PlaceId(i)))?;
    }
    let shift = |arcs: &[(PlaceId, u32)], by: usize| arcs.iter().map(|&(p, w)| (PlaceId(p.0 + by), w)).collect();
    for (t, name) in na.transitions().iter().zip(trans_a) {
        builder.push_transition(Transition {
            name,
            label: t.label.clone(),
            interval: t.interval,
            pre: t.pre.clone(),
            post: t.post.clone(),
        })?;
    }
    for (t, name) in nb.transitions().iter().zip(trans_b) {
        builder.push_transition(Transition {
            name,
            label: t.label.clone(),
            interval: t.interval,
            pre: shift(&t.pre, offset),
            post: shift(&t.post, offset),
        })?;
    }
    let net = builder.build();

    let t_offset = na.transitions().len();
    let lift_b = |s: &FiringSet| -> Vec<TransitionId> { s.members().iter().map(|t| TransitionId(t.0 + t_offset)).collect() };
    let synced = |s: &FiringSet, n: &crate::model::Net| s.label(n).is_some_and(|l| labels.contains(l));

    let mut sets = Vec::new();
    let mut dropped = Vec::new();
    let mut matched_b = vec![false; b.relation().len()];
    for r1 in a.relation().sets() {
        if !synced(r1, na) {
            sets.push(FiringSet::new(&net, r1.members().iter().copied()).map_err(ModelError::from)?);
            continue;
        }
        let mut matched = false;
        for (j, r2) in b.relation().sets().iter().enumerate() {
            if r2.label(nb) == r1.label(na) {
                matched = true;
                matched_b[j] = true;
                let members = r1.members().iter().copied().chain(lift_b(r2));
                sets.push(FiringSet::new(&net, members).map_err(ModelError::from)?);
            }
        }
        if !matched {
            dropped.push(DroppedSet {
                label: r1.label(na).unwrap_or_default().to_string(),
                members: r1.members().iter().map(|&t| net.transition(t).name.clone()).collect(),
            });
        }
    }
    for (j, r2) in b.relation().sets().iter().enumerate() {
        let members = lift_b(r2);
        if !synced(r2, nb) {
            sets.push(FiringSet::new(&net, members).map_err(ModelError::from)?);
        } else if !matched_b[j] {
            dropped.push(DroppedSet {
                label: r2.label(nb).unwrap_or_default().to_string(),
                members: members.iter().map(|&t| net.transition(t).name.clone()).collect(),
            });
        }
    }
    let ptpn = Ptpn::new(net, ProductRelation::new(sets))?;
    Ok(ProductOutcome { ptpn, dropped })
}

/// Left fold of [`binary_product`] over `components` in order. The policy of
/// the first component is ignored.
pub fn chain_product(components: Vec<(Ptpn, SyncPolicy)>) -> Result<ProductOutcome, ProductError> {
    let mut iter = components.into_iter();
    let (first, _) = iter.next().ok_or(ProductError::NoComponents)?;
    let mut acc = ProductOutcome {
        ptpn: first,
        dropped: Vec::new(),
    };
    for (next, policy) in iter {
        let labels = match policy {
            SyncPolicy::Intersection => SyncLabelSet::intersection(&acc.ptpn, &next),
            SyncPolicy::Labels(ls) => {
                let (la, lb) = (acc.ptpn.net().alphabet(), next.net().alphabet());
                if let Some(l) = ls.iter().find(|l| !la.contains(*l) || !lb.contains(*l)) {
                    return Err(ProductError::UnknownSyncLabel(l.clone()));
                }
                SyncLabelSet::new(ls)
            }
        };
        let step = binary_product(&acc.ptpn, &next, &labels)?;
        acc.dropped.extend(step.dropped);
        acc.ptpn = step.ptpn;
    }
    Ok(acc)
}

/// Loads every component of `manifest` with `load` and folds the product.
pub fn compose_manifest<E: std::fmt::Display>(
    manifest: &CompositionManifest,
    mut load: impl FnMut(&str) -> Result<Ptpn, E>,
) -> Result<ProductOutcome, ProductError> {
    let components = manifest
        .components
        .iter()
        .map(|c| {
            load(&c.path)
                .map(|p| (p, c.policy.clone()))
                .map_err(|e| ProductError::Load {
                    path: c.path.clone(),
                    message: e.to_string(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    chain_product(components)
}
