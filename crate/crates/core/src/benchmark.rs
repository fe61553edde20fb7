//! Supply-chain benchmark generator.
//!
//! A factory orders parts from `n` suppliers. Each supplier inspects,
//! acknowledges, produces and ships its order, then either gets the
//! delivery validated or asks a manager for a modification. Managers are a
//! shared pool: a modification request needs an idle manager for a short
//! on-site visit before the grant. When every supplier is done the factory
//! synchronises with the end-of-line, which races a global deadline.
//!
//! Nets are composed in a fixed order: manager, factory, suppliers one by
//! one, end-of-line. See `BENCHMARK.md` for the reconstructed topology.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{AcceptanceSpec, MarkingPredicate};
use crate::model::{lift_to_ptpn, ModelError, NetBuilder, Ptpn};
use crate::parser::{serialize_manifest, serialize_net, CompositionManifest, ManifestComponent, SyncPolicy};
use crate::product::{chain_product, ProductError, ProductOutcome};
use crate::time::{IntervalError, TimeInterval};

pub const SUCCESS_LABEL: &str = "success";
pub const TIMEOUT_LABEL: &str = "timeout";
pub const SYNC_LABEL: &str = "SYNC";
pub const ACCEPTING_PLACE: &str = "EOL_accepted";

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error("cannot write benchmark files: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainConfig {
    pub n_suppliers: usize,
    pub n_managers: u32,
    /// Upper bound of the manager's grant interval.
    pub mod_upper: i64,
    pub staggered: bool,
    pub deadline: i64,
    pub inspection: TimeInterval,
    pub production: TimeInterval,
    /// Supplier to factory transport.
    pub transport: TimeInterval,
    /// Manager's on-site visit before a grant.
    pub visit: TimeInterval,
    pub so_interval: TimeInterval,
    /// Order interval of supplier 1 when staggered.
    pub staggered_so: TimeInterval,
    pub manager_lower: i64,
    /// Per-supplier order intervals overriding the defaults above.
    pub so_overrides: BTreeMap<usize, TimeInterval>,
}

fn iv(a: i64, b: i64) -> TimeInterval {
    TimeInterval::closed(a, b).expect("constant interval is valid")
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_suppliers: 1,
            n_managers: 1,
            mod_upper: 6,
            staggered: false,
            deadline: 210,
            inspection: iv(1, 7),
            production: iv(6, 10),
            transport: iv(3, 12),
            visit: iv(1, 2),
            so_interval: iv(0, 1),
            staggered_so: iv(50, 100),
            manager_lower: 2,
            so_overrides: BTreeMap::new(),
        }
    }
}

impl ChainConfig {
    pub fn new(n_suppliers: usize, n_managers: u32, mod_upper: i64, staggered: bool) -> Self {
        ChainConfig {
            n_suppliers,
            n_managers,
            mod_upper,
            staggered,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), BenchmarkError> {
        let bad = |m: &str| Err(BenchmarkError::Config(m.to_string()));
        if self.n_suppliers == 0 {
            return bad("at least one supplier is required");
        }
        if self.n_managers == 0 {
            return bad("at least one manager is required");
        }
        if self.manager_lower < 0 || self.mod_upper < self.manager_lower {
            return bad("grant upper bound must be at least the manager lower bound");
        }
        if self.deadline <= 0 {
            return bad("deadline must be positive");
        }
        if let Some(i) = self.so_overrides.keys().find(|&&i| i >= self.n_suppliers) {
            return Err(BenchmarkError::Config(format!("order override for missing supplier {i}")));
        }
        Ok(())
    }

    /// Order interval of supplier `i`.
    pub fn order_interval(&self, i: usize) -> TimeInterval {
        if let Some(o) = self.so_overrides.get(&i) {
            *o
        } else if self.staggered && i == 1 {
            self.staggered_so
        } else {
            self.so_interval
        }
    }

    fn grant(&self) -> Result<TimeInterval, IntervalError> {
        TimeInterval::closed(self.manager_lower, self.mod_upper)
    }

    /// Success / timeout labels and the accepting terminal marking.
    pub fn acceptance(&self) -> AcceptanceSpec {
        AcceptanceSpec {
            success_label: Some(SUCCESS_LABEL.to_string()),
            timeout_label: Some(TIMEOUT_LABEL.to_string()),
            accepting: MarkingPredicate::parse(&format!("{ACCEPTING_PLACE}>=1")).expect("static predicate"),
        }
    }
}

fn urgent() -> TimeInterval {
    iv(0, 0)
}

fn free() -> TimeInterval {
    TimeInterval::unbounded()
}

pub fn supplier_labels(i: usize) -> [String; 6] {
    [
        format!("SO_BAZ_S{i}"),
        format!("ACK_S{i}_BAZ_SO"),
        format!("POK{i}"),
        format!("MOD_S{i}_BAZ"),
        format!("MOD_BAZ_S{i}"),
        SYNC_LABEL.to_string(),
    ]
}

pub fn gen_supplier(i: usize, cfg: &ChainConfig) -> Result<Ptpn, BenchmarkError> {
    let [so, ack, pok, mod_req, mod_grant, sync] = supplier_labels(i);
    let p = |s: &str| format!("S{i}_{s}");
    let mut b = NetBuilder::new(format!("supplier{i}"));
    for (name, tokens) in [
        ("idle", 1),
        ("ordered", 0),
        ("inspected", 0),
        ("acked", 0),
        ("produced", 0),
        ("delivered", 0),
        ("awaiting", 0),
        ("done", 0),
        ("finished", 0),
    ] {
        b.place(p(name), tokens)?;
    }
    let steps: [(&str, Option<&str>, TimeInterval, &str, &str); 9] = [
        ("receive_so", Some(&so), free(), "idle", "ordered"),
        ("INS", None, cfg.inspection, "ordered", "inspected"),
        ("ack", Some(&ack), urgent(), "inspected", "acked"),
        ("produce", None, cfg.production, "acked", "produced"),
        ("ship", None, cfg.transport, "produced", "delivered"),
        ("pok", Some(&pok), urgent(), "delivered", "done"),
        ("mod_request", Some(&mod_req), urgent(), "delivered", "awaiting"),
        ("mod_granted", Some(&mod_grant), free(), "awaiting", "done"),
        ("sync", Some(&sync), free(), "done", "finished"),
    ];
    for (name, label, interval, from, to) in steps {
        b.transition(p(name), label, interval, &[(&p(from), 1)], &[(&p(to), 1)])?;
    }
    Ok(lift_to_ptpn(b.build()))
}

pub fn gen_manager(cfg: &ChainConfig) -> Result<Ptpn, BenchmarkError> {
    let grant = cfg.grant()?;
    let mut b = NetBuilder::new("manager");
    b.place("M_IDLE", cfg.n_managers)?;
    for i in 0..cfg.n_suppliers {
        for place in ["visit", "granting", "granted"] {
            b.place(format!("M_{place}_{i}"), 0)?;
        }
    }
    for i in 0..cfg.n_suppliers {
        let [_, _, pok, mod_req, mod_grant, _] = supplier_labels(i);
        let (visit, granting, granted) = (format!("M_visit_{i}"), format!("M_granting_{i}"), format!("M_granted_{i}"));
        b.transition(format!("M_validation_{i}"), Some(&pok), free(), &[("M_IDLE", 1)], &[("M_IDLE", 1)])?;
        b.transition(format!("M_t9_{i}"), Some(&mod_req), free(), &[("M_IDLE", 1)], &[(&visit, 1)])?;
        b.transition(
            format!("M_check_{i}"),
            None,
            cfg.visit,
            &[(&visit, 1)],
            &[("M_IDLE", 1), (&granting, 1)],
        )?;
        b.transition(format!("M_t0_{i}"), Some(&mod_grant), grant, &[(&granting, 1)], &[(&granted, 1)])?;
    }
    Ok(lift_to_ptpn(b.build()))
}

pub fn gen_factory(cfg: &ChainConfig) -> Result<Ptpn, BenchmarkError> {
    let mut b = NetBuilder::new("factory");
    for i in 0..cfg.n_suppliers {
        for (place, tokens) in [("start", 1), ("ordered", 0), ("acked", 0), ("done", 0)] {
            b.place(format!("F_{place}_{i}"), tokens)?;
        }
    }
    b.place("F_complete", 0)?;
    for i in 0..cfg.n_suppliers {
        let [so, ack, pok, _, mod_grant, _] = supplier_labels(i);
        let f = |s: &str| format!("F_{s}_{i}");
        b.transition(format!("F_order{i}"), Some(&so), cfg.order_interval(i), &[(&f("start"), 1)], &[(&f("ordered"), 1)])?;
        b.transition(f("ack"), Some(&ack), free(), &[(&f("ordered"), 1)], &[(&f("acked"), 1)])?;
        b.transition(f("pok"), Some(&pok), free(), &[(&f("acked"), 1)], &[(&f("done"), 1)])?;
        b.transition(f("mod"), Some(&mod_grant), free(), &[(&f("acked"), 1)], &[(&f("done"), 1)])?;
    }
    let done: Vec<String> = (0..cfg.n_suppliers).map(|i| format!("F_done_{i}")).collect();
    let pre: Vec<(&str, u32)> = done.iter().map(|d| (d.as_str(), 1)).collect();
    b.transition("F_te", Some(SYNC_LABEL), urgent(), &pre, &[("F_complete", 1)])?;
    Ok(lift_to_ptpn(b.build()))
}

pub fn gen_end_of_line(cfg: &ChainConfig) -> Result<Ptpn, BenchmarkError> {
    let mut b = NetBuilder::new("end_of_line");
    for (place, tokens) in [("ready", 1), ("Waiting", 1), ("done", 0), ("accepted", 0), ("timed_out", 0)] {
        b.place(format!("EOL_{place}"), tokens)?;
    }
    b.transition("EOL_sync", Some(SYNC_LABEL), free(), &[("EOL_ready", 1)], &[("EOL_Waiting", 1)])?;
    b.transition("EOL_t0", None, urgent(), &[("EOL_Waiting", 2)], &[("EOL_done", 1)])?;
    b.transition("EOL_success", Some(SUCCESS_LABEL), free(), &[("EOL_done", 1)], &[(ACCEPTING_PLACE, 1)])?;
    let deadline = TimeInterval::closed(cfg.deadline, cfg.deadline)?;
    b.transition("EOL_timeout", Some(TIMEOUT_LABEL), deadline, &[("EOL_Waiting", 1)], &[("EOL_timed_out", 1)])?;
    Ok(lift_to_ptpn(b.build()))
}

/// Component nets in composition order with their file stems.
pub fn components(cfg: &ChainConfig) -> Result<Vec<(String, Ptpn)>, BenchmarkError> {
    cfg.validate()?;
    let mut out = vec![
        ("manager".to_string(), gen_manager(cfg)?),
        ("factory".to_string(), gen_factory(cfg)?),
    ];
    for i in 0..cfg.n_suppliers {
        out.push((format!("supplier{i}"), gen_supplier(i, cfg)?));
    }
    out.push(("end_of_line".to_string(), gen_end_of_line(cfg)?));
    Ok(out)
}

/// Manifest listing `<stem>.net` components with the default policy.
pub fn assemble_chain(cfg: &ChainConfig) -> Result<CompositionManifest, BenchmarkError> {
    let components = components(cfg)?
        .into_iter()
        .map(|(stem, _)| ManifestComponent {
            path: format!("{stem}.net"),
            policy: SyncPolicy::Intersection,
        })
        .collect();
    CompositionManifest::new(components).map_err(|e| BenchmarkError::Config(e.to_string()))
}

/// The full composed model.
pub fn build_chain(cfg: &ChainConfig) -> Result<ProductOutcome, BenchmarkError> {
    let parts = components(cfg)?
        .into_iter()
        .map(|(_, p)| (p, SyncPolicy::Intersection))
        .collect();
    Ok(chain_product(parts)?)
}

/// Writes every component net and `chain.manifest` into `dir`; returns the
/// manifest path.
pub fn write_chain(cfg: &ChainConfig, dir: &Path) -> Result<PathBuf, BenchmarkError> {
    fs::create_dir_all(dir)?;
    for (stem, p) in components(cfg)? {
        fs::write(dir.join(format!("{stem}.net")), serialize_net(&p))?;
    }
    let manifest = dir.join("chain.manifest");
    fs::write(&manifest, serialize_manifest(&assemble_chain(cfg)?))?;
    Ok(manifest)
}
