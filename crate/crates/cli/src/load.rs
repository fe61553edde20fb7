//! Model inputs: a net file, a composition manifest, or the generated
//! supply-chain benchmark.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use ptpn::analysis::{AcceptanceSpec, MarkingPredicate};
use ptpn::benchmark::{build_chain, ChainConfig};
use ptpn::parser::{parse_manifest, parse_net};
use ptpn::product::{compose_manifest, ProductOutcome};
use ptpn::Ptpn;

use crate::UsageError;

#[derive(clap::Args, Debug, Clone)]
pub struct ModelArgs {
    /// A `.net` file or a composition manifest (`.manifest`). Without it the
    /// supply-chain benchmark is generated from the flags below.
    pub input: Option<PathBuf>,
    /// Benchmark: number of suppliers.
    #[arg(long, default_value_t = 1)]
    pub suppliers: usize,
    /// Benchmark: number of managers.
    #[arg(long, default_value_t = 1)]
    pub managers: u32,
    /// Benchmark: upper bound of the manager grant interval [2,y].
    #[arg(long, default_value_t = 6)]
    pub y: i64,
    /// Benchmark: stagger the second supplier's order to [50,100].
    #[arg(long)]
    pub staggered: bool,
    /// Benchmark: end-of-line deadline.
    #[arg(long, default_value_t = 210)]
    pub deadline: i64,
}

impl ModelArgs {
    pub fn chain_config(&self) -> ChainConfig {
        ChainConfig {
            deadline: self.deadline,
            ..ChainConfig::new(self.suppliers, self.managers, self.y, self.staggered)
        }
    }
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct SpecArgs {
    /// Label whose occurrence must be inevitable.
    #[arg(long)]
    pub success_label: Option<String>,
    /// Label whose reachability means the deadline was missed.
    #[arg(long)]
    pub timeout_label: Option<String>,
    /// Predicate marking dead classes as accepted, e.g. `done>=1,err=0`.
    #[arg(long)]
    pub accept: Option<String>,
}

pub struct Loaded {
    pub outcome: ProductOutcome,
    /// Defaults derived from the input (benchmark labels when generated).
    pub spec: AcceptanceSpec,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_file(path: &Path) -> Result<Ptpn> {
    parse_net(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn is_manifest(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "manifest")
}

pub fn load(args: &ModelArgs) -> Result<Loaded> {
    let Some(path) = &args.input else {
        let cfg = args.chain_config();
        let outcome = build_chain(&cfg)?;
        return Ok(Loaded { outcome, spec: cfg.acceptance() });
    };
    let outcome = if is_manifest(path) {
        let manifest = parse_manifest(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        compose_manifest(&manifest, |component| parse_file(&base.join(component)))?
    } else {
        ProductOutcome { ptpn: parse_file(path)?, dropped: Vec::new() }
    };
    // the benchmark labels are used when the model carries them
    let alphabet = outcome.ptpn.net().alphabet();
    let known = |l: &str| alphabet.contains(l).then(|| l.to_string());
    let spec = AcceptanceSpec {
        success_label: known(ptpn::benchmark::SUCCESS_LABEL),
        timeout_label: known(ptpn::benchmark::TIMEOUT_LABEL),
        accepting: MarkingPredicate::default(),
    };
    Ok(Loaded { outcome, spec })
}

/// Flags override the input's defaults; an empty label disables the check.
pub fn resolve_spec(defaults: AcceptanceSpec, flags: &SpecArgs) -> Result<AcceptanceSpec> {
    let pick = |flag: &Option<String>, default: Option<String>| match flag {
        Some(l) if l.is_empty() => None,
        Some(l) => Some(l.clone()),
        None => default,
    };
    let accepting = match &flags.accept {
        Some(text) => MarkingPredicate::parse(text).map_err(|e| UsageError(format!("--accept: {e}")))?,
        None => defaults.accepting,
    };
    Ok(AcceptanceSpec {
        success_label: pick(&flags.success_label, defaults.success_label),
        timeout_label: pick(&flags.timeout_label, defaults.timeout_label),
        accepting,
    })
}
