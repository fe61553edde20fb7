//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p ptpn --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{fixture, fm_feasible, max_upper, random_consistent_dbm, random_dbm, random_net, random_syntax_net, NetShape};
use ptpn::analysis::oracle::{discrete_time_oracle, sync_traces, OracleLimits};
use ptpn::analysis::{find_dead_classes, verdict, AcceptanceSpec, MarkingPredicate, VerdictKind};
use ptpn::benchmark::{build_chain, components, ChainConfig};
use ptpn::dbm::Dbm;
use ptpn::model::Ptpn;
use ptpn::parser::{parse_manifest, parse_net, serialize_net};
use ptpn::product::{binary_product, compose_manifest, SyncLabelSet};
use ptpn::scg::{build_scg, firable_firing_sets, ExploreOptions, ScgStats};
use ptpn::time::Bound;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set_names(p: &Ptpn) -> BTreeSet<BTreeSet<String>> {
    p.relation()
        .sets()
        .iter()
        .map(|s| s.names(p.net()).into_iter().map(str::to_string).collect())
        .collect()
}

fn timelock_product() -> Ptpn {
    let manifest = parse_manifest(&fixture("timelock.manifest")).unwrap();
    compose_manifest(&manifest, |path| parse_net(&fixture(path))).unwrap().ptpn
}

fn timelock_fixture() -> Outcome {
    let start = Instant::now();
    let n1 = parse_net(&fixture("timelock_n1.net")).map_err(|e| e.to_string())?;
    let n2 = parse_net(&fixture("timelock_n2.net")).map_err(|e| e.to_string())?;
    let product = binary_product(&n1, &n2, &SyncLabelSet::new(["a", "b"])).map_err(|e| e.to_string())?.ptpn;
    let groups = set_names(&product);
    let expected: BTreeSet<BTreeSet<String>> = [
        vec!["t0.1", "t0.2"],
        vec!["t1.1", "t1.2"],
        vec!["t3.1", "t1.2"],
        vec!["t"],
    ]
    .into_iter()
    .map(|g| g.into_iter().map(str::to_string).collect())
    .collect();
    ensure(groups == expected, || format!("groups {groups:?}"))?;
    ensure(product == timelock_product(), || "manifest composition differs".into())?;

    let g = build_scg(&product, &ExploreOptions::default());
    ensure(g.is_complete(), || "exploration incomplete".into())?;
    let late = product.relation().sets().iter().position(|s| {
        let names: BTreeSet<&str> = s.names(product.net()).into_iter().collect();
        names == BTreeSet::from(["t3.1", "t1.2"])
    });
    let late = late.ok_or("group {t3.1,t1.2} missing")?;
    let ever_firable = g.classes().iter().any(|c| firable_firing_sets(c, &product).contains(&late));
    ensure(!ever_firable, || "{t3.1,t1.2} firable somewhere".into())?;

    let silent = product.relation().sets().iter().position(|s| s.names(product.net()) == ["t"]).unwrap();
    let after_t: Vec<usize> = g.edges().iter().filter(|e| e.set == silent).map(|e| e.target).collect();
    let spec = AcceptanceSpec {
        accepting: MarkingPredicate::parse("p2>=1,q2>=1").unwrap(),
        ..Default::default()
    };
    let dead = find_dead_classes(&g, &spec).map_err(|e| e.to_string())?;
    ensure(after_t.len() == 1 && dead.timelocked == after_t, || {
        format!("timelocked {:?}, after t {:?}", dead.timelocked, after_t)
    })?;
    ensure(dead.accepting.len() == 1, || format!("accepting {:?}", dead.accepting))?;
    let v = verdict(&g, &spec).map_err(|e| e.to_string())?;
    ensure(v.kind == VerdictKind::TimeLock, || format!("verdict {}", v.kind))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    let s = g.stats();
    Ok(format!(
        "4 groups, {{t3.1,t1.2}} never firable, {} classes / {} edges, dead class c{} timelocked ({took:.2?})",
        s.classes, s.edges, after_t[0]
    ))
}

fn check_cell(cfg: &ChainConfig) -> Result<(VerdictKind, ScgStats, Duration), String> {
    let start = Instant::now();
    let model = build_chain(cfg).map_err(|e| e.to_string())?;
    let g = build_scg(&model.ptpn, &ExploreOptions::default());
    let v = verdict(&g, &cfg.acceptance()).map_err(|e| e.to_string())?;
    Ok((v.kind, g.stats(), start.elapsed()))
}

const YS: [i64; 6] = [6, 15, 50, 60, 175, 180];

fn table(columns: &[(usize, u32, bool, [VerdictKind; 6])], limit: Duration) -> Outcome {
    let mut rows = Vec::new();
    for &(n, m, staggered, expected) in columns {
        let mut got = Vec::new();
        for (y, want) in YS.iter().zip(expected) {
            let (kind, _, took) = check_cell(&ChainConfig::new(n, m, *y, staggered))?;
            ensure(kind == want, || format!("{n}S/{m}M staggered={staggered} y={y}: {kind}, expected {want}"))?;
            ensure(took < limit, || format!("{n}S/{m}M y={y} took {took:?}"))?;
            got.push(kind.to_string());
        }
        rows.push(format!("{n}S/{m}M: {}", got.join(" ")));
    }
    Ok(rows.join("; "))
}

fn table2() -> Outcome {
    use VerdictKind::*;
    table(
        &[
            (1, 1, false, [Success, Success, Success, Success, Success, TimeOut]),
            (2, 1, false, [TimeLock, TimeLock, TimeLock, TimeLock, TimeLock, TimeOut]),
            (2, 2, false, [Success, Success, Success, Success, Success, TimeOut]),
        ],
        Duration::from_secs(30),
    )
}

fn table3() -> Outcome {
    use VerdictKind::*;
    table(
        &[(2, 1, true, [Success, Success, Success, Success, TimeOut, TimeOut])],
        Duration::from_secs(30),
    )
}

fn scaling() -> Outcome {
    let limits = [Duration::from_secs(1), Duration::from_secs(10), Duration::from_secs(600)];
    let mut prev: Option<ScgStats> = None;
    let mut report = Vec::new();
    for (n, limit) in (1..=3).zip(limits) {
        let (_, s, took) = check_cell(&ChainConfig::new(n, 1, 6, false))?;
        ensure(took < limit, || format!("{n} suppliers took {took:?}"))?;
        if let Some(p) = prev {
            ensure(
                s.classes > p.classes && s.markings > p.markings && s.domains > p.domains && s.edges > p.edges,
                || format!("stats not increasing: {p:?} -> {s:?}"),
            )?;
        }
        report.push(format!("{n}: {}c/{}m/{}d/{}e in {took:.2?}", s.classes, s.markings, s.domains, s.edges));
        prev = Some(s);
    }
    Ok(report.join(", "))
}

fn oracle_markings() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let mut checked = 0;
    for i in 0..40 {
        let shape = NetShape {
            random_relation: i % 2 == 1,
            ..Default::default()
        };
        let p = random_net(&mut rng, &shape, "r");
        let g = build_scg(&p, &ExploreOptions { max_classes: Some(50_000), ..Default::default() });
        ensure(g.is_complete(), || format!("net {i}: class graph did not close"))?;
        let scg: BTreeSet<_> = g.classes().iter().map(|c| c.marking.clone()).collect();
        let horizon = 3 * max_upper(&p) as u32;
        let oracle = discrete_time_oracle(&p, OracleLimits { horizon, max_events: 0 }).map_err(|e| e.to_string())?;
        ensure(scg == oracle.markings, || {
            format!("net {i}: scg {scg:?} vs oracle {:?}\n{}", oracle.markings, serialize_net(&p))
        })?;
        checked += 1;
    }
    Ok(format!("{checked} random nets, marking sets identical"))
}

fn congruence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let limits = OracleLimits { horizon: 6, max_events: 3 };
    let mut checked = 0;
    let mut sizes = Vec::new();
    for i in 0..12 {
        let shape_a = NetShape {
            max_places: 3,
            max_transitions: 3,
            labels: &["a", "b"],
            ..Default::default()
        };
        let shape_b = NetShape {
            labels: &["b", "c"],
            ..shape_a.clone()
        };
        let a = random_net(&mut rng, &shape_a, "A");
        let b = random_net(&mut rng, &shape_b, "B");
        let labels = SyncLabelSet::intersection(&a, &b);
        let product = binary_product(&a, &b, &labels).map_err(|e| e.to_string())?.ptpn;
        let run = |p: &Ptpn| discrete_time_oracle(p, limits).map(|r| r.traces).map_err(|e| e.to_string());
        let (ta, tb, tp) = (run(&a)?, run(&b)?, run(&product)?);
        let synced = sync_traces(&ta, &tb, &labels, limits.max_events);
        ensure(tp == synced, || {
            let extra: Vec<_> = tp.symmetric_difference(&synced).take(3).collect();
            format!("pair {i}: trace sets differ, e.g. {extra:?}")
        })?;
        sizes.push(tp.len());
        checked += 1;
    }
    Ok(format!("{checked} pairs, trace sets equal (sizes {sizes:?})"))
}

fn dbm_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let mut idempotent = 0;
    while idempotent < 1000 {
        let d = if rng.gen_bool(0.5) { random_consistent_dbm(&mut rng, 4) } else { random_dbm(&mut rng, 4) };
        if let Some(c) = d.canonicalize() {
            ensure(c.canonicalize().as_ref() == Some(&c), || format!("not idempotent: {d:?}"))?;
            idempotent += 1;
        }
    }
    let mut agree = 0;
    let (mut feasible, mut infeasible) = (0, 0);
    for _ in 0..2000 {
        let d = if rng.gen_bool(0.3) { random_consistent_dbm(&mut rng, 4) } else { random_dbm(&mut rng, 4) };
        let ours = d.is_consistent();
        ensure(ours == fm_feasible(&d), || format!("consistency disagrees on {d:?}"))?;
        if ours {
            feasible += 1;
        } else {
            infeasible += 1;
        }
        agree += 1;
    }
    // [3,∞) against [0,2] on one variable
    let mut joint = Dbm::unconstrained(2);
    joint.set(0, 1, Bound::le_int(-3));
    joint.set(1, 0, Bound::le_int(2));
    ensure(joint.canonicalize().is_none(), || "[3,w[ with [0,2] not empty".into())?;
    Ok(format!(
        "{idempotent} idempotence checks, {agree} Fourier–Motzkin agreements ({feasible} feasible / {infeasible} infeasible), [3,w[ ∧ [0,2] empty"
    ))
}

fn malformed_corpus() -> Vec<&'static str> {
    vec![
        "pl p (1",
        "pl p (-1)",
        "pl p\npl p",
        "tr t p -> q",
        "pl p\ntr t [5,4] p -> p",
        "pl p\ntr t [2,2[ p -> p",
        "pl p\ntr t ]3,3] p -> p",
        "pl p\ntr t [1,w] p -> p",
        "pl p\ntr t [w,3] p -> p",
        "pl p\ntr t [1/0,3] p -> p",
        "pl p\ntr t : -> p",
        "pl p\ntr t p*0 -> p",
        "pl p\ntr t p p",
        "pl p\ntr t p -> p\ntr t p -> p",
        "pl p\ntr t : a p -> p\ntr u : b p -> p\nsync t u",
        "pl p\ntr t : a p -> p\ntr u : a p -> p\nsync t u",
        "pl p\ntr t p -> p\nsync nope",
        "net",
        "net a b",
        "bogus line",
        "pl p\ntr t [1,2 p -> p",
        "pl p\ntr t [99999999999999999999,1] p -> p",
        "pl \u{1F600}",
    ]
}

fn parser_round_trip() -> Outcome {
    let mut fixtures = 0;
    for entry in std::fs::read_dir(common::fixture_dir()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "net") {
            let p = parse_net(&std::fs::read_to_string(&path).unwrap()).map_err(|e| format!("{path:?}: {e}"))?;
            ensure(parse_net(&serialize_net(&p)).as_ref() == Ok(&p), || format!("{path:?} does not round-trip"))?;
            fixtures += 1;
        }
    }
    for (stem, p) in components(&ChainConfig::new(3, 2, 60, true)).map_err(|e| e.to_string())? {
        ensure(parse_net(&serialize_net(&p)).as_ref() == Ok(&p), || format!("{stem} does not round-trip"))?;
        fixtures += 1;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    for i in 0..500 {
        let p = random_syntax_net(&mut rng, i);
        let text = serialize_net(&p);
        let back = parse_net(&text).map_err(|e| format!("random net {i}: {e}\n{text}"))?;
        ensure(back == p, || format!("random net {i} differs after round-trip\n{text}"))?;
    }
    let corpus = malformed_corpus();
    for text in &corpus {
        let err = match parse_net(text) {
            Ok(_) => return Err(format!("accepted malformed input {text:?}")),
            Err(e) => e,
        };
        ensure(err.line >= 1 && err.column >= 1, || format!("no position for {text:?}"))?;
    }
    // byte-level mutations of valid files must diagnose or parse, never panic
    let seeds: Vec<String> = ["timelock_n1.net", "timelock_product.net", "open_intervals.net"].map(fixture).into();
    let mut mutated = 0;
    for _ in 0..2000 {
        let mut bytes = seeds[rng.gen_range(0..seeds.len())].clone().into_bytes();
        for _ in 0..rng.gen_range(1..4) {
            let at = rng.gen_range(0..bytes.len());
            match rng.gen_range(0..3) {
                0 => {
                    const ALPHABET: &[u8] = b"[]()*:->,/w# \n0123456789abc";
                    bytes[at] = ALPHABET[rng.gen_range(0..ALPHABET.len())];
                }
                1 => {
                    bytes.remove(at);
                }
                _ => bytes.insert(at, rng.gen()),
            }
        }
        let text = String::from_utf8_lossy(&bytes);
        let outcome = std::panic::catch_unwind(|| parse_net(&text).map(|_| ()));
        ensure(outcome.is_ok(), || format!("parser panicked on {text:?}"))?;
        mutated += 1;
    }
    Ok(format!(
        "{fixtures} fixtures + 500 random nets round-trip, {} malformed inputs diagnosed, {mutated} mutations without panic",
        corpus.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 timelock fixture", timelock_fixture),
        ("2 feasibility table (non-staggered)", table2),
        ("3 feasibility table (staggered)", table3),
        ("4 scaling with supplier count", scaling),
        ("5 class graph vs discrete-time markings", oracle_markings),
        ("6 product congruence on traces", congruence),
        ("7 DBM properties", dbm_suite),
        ("8 parser round-trip and diagnostics", parser_round_trip),
    ];
    let mut results = BTreeMap::new();
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".to_string()));
        match &outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => println!("FAIL criterion {name}: {why}"),
        }
        results.insert(name, outcome.is_ok());
    }
    let failed = results.values().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
