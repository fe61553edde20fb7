//! `ptpn`: validate, compose, explore and check product time Petri nets.
//!
//! Exit codes: 0 Success, 1 error, 2 TimeOut, 3 TimeLock, 4 Inconclusive,
//! 5 partial exploration, 64 usage error.

mod load;
mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ptpn::benchmark::{build_chain, write_chain, ChainConfig};
use ptpn::export::{to_aut, to_dot};
use ptpn::parser::serialize_net;
use ptpn::scg::SearchOrder;
use ptpn::{build_scg, verdict, ExploreOptions};

use load::{load, resolve_spec, ModelArgs, SpecArgs};
use report::{exit, ExploreReport, Report, Stats};

/// A usage mistake detected after argument parsing; exits with 64.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Parser, Debug)]
#[command(name = "ptpn", version, about = "Product time Petri net toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct LimitArgs {
    /// Stop after this many classes (result is partial).
    #[arg(long)]
    limit_classes: Option<usize>,
    /// Stop after this many seconds (result is partial).
    #[arg(long)]
    budget_seconds: Option<f64>,
    /// Expand breadth-first levels on all cores; output is unchanged.
    #[arg(long)]
    parallel: bool,
}

impl LimitArgs {
    fn options(&self, order: SearchOrder) -> Result<ExploreOptions> {
        let time_budget = match self.budget_seconds {
            Some(s) if !(s.is_finite() && s > 0.0) => {
                return Err(UsageError("--budget-seconds must be positive".into()).into())
            }
            s => s.map(Duration::from_secs_f64),
        };
        Ok(ExploreOptions { max_classes: self.limit_classes, time_budget, order, parallel: self.parallel })
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GraphFormat {
    Dot,
    Aut,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Grid {
    Feasibility,
    Staggered,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Order {
    Bfs,
    Dfs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse (and compose) a model and print a summary.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Compose a manifest (or the benchmark) into a single net file.
    Compose {
        #[command(flatten)]
        model: ModelArgs,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the state class graph and print its statistics.
    Explore {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, value_enum, default_value_t = Order::Bfs)]
        order: Order,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Classify the model as Success, TimeOut, TimeLock or Inconclusive.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a grid of benchmark configurations and print CSV.
    Sweep(SweepArgs),
    /// Write the state class graph as DOT or AUT.
    Export {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, value_enum)]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the benchmark component nets and manifest into a directory.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    /// Preset grid: `feasibility` (non-staggered, up to 3 suppliers) or
    /// `staggered`.
    #[arg(long, value_enum)]
    grid: Option<Grid>,
    /// Supplier counts, e.g. `1,2`. Combined with every manager count not
    /// above it.
    #[arg(long, value_delimiter = ',')]
    suppliers: Vec<usize>,
    /// Manager counts, e.g. `1,2`.
    #[arg(long, value_delimiter = ',')]
    managers: Vec<u32>,
    /// Grant upper bounds, e.g. `6,15,50`.
    #[arg(long, value_delimiter = ',')]
    y: Vec<i64>,
    /// Staggered ordering for every row.
    #[arg(long)]
    staggered: bool,
    #[arg(long, default_value_t = 210)]
    deadline: i64,
    #[command(flatten)]
    limits: LimitArgs,
    /// CSV output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

const GRID_YS: [i64; 6] = [6, 15, 50, 60, 175, 180];

struct SweepPlan {
    /// (suppliers, managers) pairs.
    columns: Vec<(usize, u32)>,
    ys: Vec<i64>,
    staggered: bool,
}

fn sweep_plan(args: &SweepArgs) -> Result<SweepPlan> {
    let (columns, staggered) = match args.grid {
        Some(Grid::Feasibility) => (vec![(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)], false),
        Some(Grid::Staggered) => (vec![(1, 1), (2, 1), (2, 2)], true),
        None => {
            if args.suppliers.is_empty() || args.managers.is_empty() {
                return Err(UsageError("sweep needs --grid or both --suppliers and --managers".into()).into());
            }
            let mut cols = Vec::new();
            for &s in &args.suppliers {
                for &m in &args.managers {
                    if m as usize <= s {
                        cols.push((s, m));
                    }
                }
            }
            if cols.is_empty() {
                return Err(UsageError("no (suppliers, managers) pair with managers <= suppliers".into()).into());
            }
            (cols, args.staggered)
        }
    };
    let ys = match (args.grid.is_some(), args.y.is_empty()) {
        (true, true) => GRID_YS.to_vec(),
        (false, true) => return Err(UsageError("--y needs at least one value".into()).into()),
        _ => args.y.clone(),
    };
    Ok(SweepPlan { columns, ys, staggered: staggered || args.staggered })
}

#[derive(serde::Serialize)]
struct SweepRow {
    suppliers: usize,
    managers: u32,
    y: i64,
    staggered: bool,
    verdict: String,
    classes: usize,
    markings: usize,
    domains: usize,
    transitions: usize,
}

fn sweep(args: &SweepArgs) -> Result<u8> {
    let SweepPlan { columns, ys, staggered } = sweep_plan(args)?;
    let opts = args.limits.options(SearchOrder::BreadthFirst)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    let mut code = exit::SUCCESS;
    for &(suppliers, managers) in &columns {
        for &y in &ys {
            let cfg = ChainConfig { deadline: args.deadline, ..ChainConfig::new(suppliers, managers, y, staggered) };
            let model = build_chain(&cfg)?;
            let g = build_scg(&model.ptpn, &opts);
            let kind = if g.is_complete() {
                verdict(&g, &cfg.acceptance())?.kind.to_string()
            } else {
                code = exit::PARTIAL;
                "Partial".to_string()
            };
            let s = Stats::from(g.stats());
            csv.serialize(SweepRow {
                suppliers,
                managers,
                y,
                staggered,
                verdict: kind,
                classes: s.classes,
                markings: s.markings,
                domains: s.domains,
                transitions: s.transitions,
            })?;
            eprintln!("{suppliers} suppliers, {managers} managers, y={y}: done in {:.2?}", g.elapsed());
        }
    }
    let bytes = csv.into_inner().context("flushing CSV")?;
    emit(args.out.as_deref(), &bytes)?;
    Ok(code)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => match io::stdout().lock().write_all(bytes) {
            // a closed pipe (`| head`) is not an error
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing to standard output"),
        },
    }
}

fn warn_dropped(dropped: &[ptpn::product::DroppedSet]) {
    for d in dropped {
        eprintln!(
            "warning: firing set {{{}}} labelled `{}` has no partner and was dropped",
            d.members.join(","),
            d.label
        );
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { model } => {
            let loaded = load(&model)?;
            warn_dropped(&loaded.outcome.dropped);
            let p = &loaded.outcome.ptpn;
            let alphabet: Vec<String> = p.net().alphabet().into_iter().collect();
            let summary = format!(
                "{}: {} places, {} transitions, {} firing sets, alphabet {{{}}}\n",
                p.net().name(),
                p.net().places().len(),
                p.net().transitions().len(),
                p.relation().len(),
                alphabet.join(",")
            );
            emit(None, summary.as_bytes())?;
            Ok(exit::SUCCESS)
        }
        Command::Compose { model, out } => {
            let loaded = load(&model)?;
            warn_dropped(&loaded.outcome.dropped);
            emit(out.as_deref(), serialize_net(&loaded.outcome.ptpn).as_bytes())?;
            Ok(exit::SUCCESS)
        }
        Command::Explore { model, limits, order, format } => {
            let loaded = load(&model)?;
            warn_dropped(&loaded.outcome.dropped);
            let order = match order {
                Order::Bfs => SearchOrder::BreadthFirst,
                Order::Dfs => SearchOrder::DepthFirst,
            };
            let g = build_scg(&loaded.outcome.ptpn, &limits.options(order)?);
            let r = ExploreReport::new(&g, &loaded.outcome.dropped);
            let text = match format {
                ReportFormat::Text => r.to_text(),
                ReportFormat::Json => serde_json::to_string_pretty(&r)? + "\n",
            };
            emit(None, text.as_bytes())?;
            Ok(if g.is_complete() { exit::SUCCESS } else { exit::PARTIAL })
        }
        Command::Check { model, spec, limits, format, out } => {
            let start = Instant::now();
            let loaded = load(&model)?;
            warn_dropped(&loaded.outcome.dropped);
            let spec = resolve_spec(loaded.spec, &spec)?;
            let g = build_scg(&loaded.outcome.ptpn, &limits.options(SearchOrder::BreadthFirst)?);
            let v = if g.is_complete() { Some(verdict(&g, &spec)?) } else { None };
            let r = Report::new(&g, &loaded.outcome.dropped, &spec, v.as_ref(), start.elapsed());
            let json = serde_json::to_string_pretty(&r)?;
            let text = match format {
                ReportFormat::Text => r.to_text(),
                ReportFormat::Json => format!("{json}\n"),
            };
            emit(None, text.as_bytes())?;
            if let Some(path) = out {
                fs::write(&path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(r.exit_code)
        }
        Command::Sweep(args) => sweep(&args),
        Command::Export { model, limits, format, out } => {
            let loaded = load(&model)?;
            warn_dropped(&loaded.outcome.dropped);
            let g = build_scg(&loaded.outcome.ptpn, &limits.options(SearchOrder::BreadthFirst)?);
            let text = match format {
                GraphFormat::Dot => to_dot(&g),
                GraphFormat::Aut => to_aut(&g),
            };
            emit(out.as_deref(), text.as_bytes())?;
            Ok(if g.is_complete() { exit::SUCCESS } else { exit::PARTIAL })
        }
        Command::Generate { model, out } => {
            if model.input.is_some() {
                return Err(UsageError("generate takes no input file".into()).into());
            }
            let manifest = write_chain(&model.chain_config(), &out)?;
            emit(None, format!("{}\n", manifest.display()).as_bytes())?;
            Ok(exit::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::SUCCESS });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { exit::USAGE } else { exit::ERROR })
        }
    }
}
