//! Helpers shared by the integration tests: random nets, a Fourier–Motzkin
//! feasibility check and fixture loading.

#![allow(dead_code)]

use std::path::PathBuf;

use num_rational::Ratio;
use ptpn::dbm::Dbm;
use ptpn::model::{lift_to_ptpn, FiringSet, NetBuilder, ProductRelation, Ptpn, TransitionId};
use ptpn::time::{Bound, Rational, TimeInterval};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[derive(Clone, Debug)]
pub struct NetShape {
    pub max_places: usize,
    pub max_transitions: usize,
    pub max_bound: i64,
    pub max_tokens: u32,
    pub labels: &'static [&'static str],
    /// Build a random product relation instead of singletons.
    pub random_relation: bool,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape {
            max_places: 4,
            max_transitions: 4,
            max_bound: 5,
            max_tokens: 2,
            labels: &["a", "b"],
            random_relation: false,
        }
    }
}

/// Random bounded net with closed integer intervals. Every transition
/// consumes at least as many tokens as it produces.
pub fn random_net(rng: &mut StdRng, shape: &NetShape, name: &str) -> Ptpn {
    let n_places = rng.gen_range(1..=shape.max_places);
    let n_trans = rng.gen_range(1..=shape.max_transitions);
    let mut b = NetBuilder::new(name);
    let places: Vec<String> = (0..n_places).map(|i| format!("{name}p{i}")).collect();
    let mut tokens = vec![0u32; n_places];
    let total = rng.gen_range(1..=shape.max_tokens);
    for _ in 0..total {
        tokens[rng.gen_range(0..n_places)] += 1;
    }
    for (p, &k) in places.iter().zip(&tokens) {
        b.place(p.clone(), k).unwrap();
    }
    for i in 0..n_trans {
        let n_in = rng.gen_range(1..=n_places.min(2));
        let ins: Vec<&String> = places.choose_multiple(rng, n_in).collect();
        let n_out = rng.gen_range(0..=n_in);
        let outs: Vec<&String> = (0..n_out).map(|_| places.choose(rng).unwrap()).collect();
        let lo = rng.gen_range(0..=shape.max_bound);
        let hi = rng.gen_range(lo..=shape.max_bound);
        let label = if rng.gen_bool(0.3) {
            None
        } else {
            Some(*shape.labels.choose(rng).unwrap())
        };
        let pre: Vec<(&str, u32)> = ins.iter().map(|p| (p.as_str(), 1)).collect();
        let post: Vec<(&str, u32)> = outs.iter().map(|p| (p.as_str(), 1)).collect();
        b.transition(format!("{name}t{i}"), label, TimeInterval::closed(lo, hi).unwrap(), &pre, &post)
            .unwrap();
    }
    let net = b.build();
    if !shape.random_relation {
        return lift_to_ptpn(net);
    }
    // singletons for some transitions, plus random valid multi-member sets
    let ids: Vec<TransitionId> = net.transition_ids().collect();
    let mut sets = Vec::new();
    for &t in &ids {
        if rng.gen_bool(0.7) {
            sets.push(FiringSet::singleton(t));
        }
    }
    for _ in 0..2 {
        let k = rng.gen_range(2..=ids.len().max(2));
        let pick: Vec<TransitionId> = ids.choose_multiple(rng, k.min(ids.len())).copied().collect();
        if let Ok(s) = FiringSet::new(&net, pick) {
            sets.push(s);
        }
    }
    Ptpn::new(net, ProductRelation::new(sets)).unwrap()
}

/// Largest finite upper bound of any transition.
pub fn max_upper(p: &Ptpn) -> i64 {
    p.net()
        .transitions()
        .iter()
        .filter_map(|t| t.interval.upper().value())
        .map(|v| v.to_integer())
        .max()
        .unwrap_or(0)
}

/// `Σ coeff·x ≤ c` (or `<` when strict) over variables `x1..xn`.
#[derive(Clone, Debug)]
struct Ineq {
    coeffs: Vec<Rational>,
    c: Rational,
    strict: bool,
}

/// Feasibility of the difference system of `d` by Fourier–Motzkin
/// elimination, with `x0` fixed to zero.
pub fn fm_feasible(d: &Dbm) -> bool {
    let n = d.dim() - 1;
    let zero = Ratio::from_integer(0);
    let mut sys = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            if i == j {
                if let Bound::Finite { value, strict } = d.get(i, i) {
                    sys.push(Ineq {
                        coeffs: vec![zero; n],
                        c: value,
                        strict,
                    });
                }
                continue;
            }
            let Bound::Finite { value, strict } = d.get(i, j) else {
                continue;
            };
            let mut coeffs = vec![zero; n];
            if i > 0 {
                coeffs[i - 1] += Ratio::from_integer(1);
            }
            if j > 0 {
                coeffs[j - 1] -= Ratio::from_integer(1);
            }
            sys.push(Ineq { coeffs, c: value, strict });
        }
    }
    for v in 0..n {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for q in sys {
            if q.coeffs[v] > zero {
                pos.push(q);
            } else if q.coeffs[v] < zero {
                neg.push(q);
            } else {
                rest.push(q);
            }
        }
        for p in &pos {
            for q in &neg {
                let (a, b) = (p.coeffs[v], -q.coeffs[v]);
                let coeffs = p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| *x * b + *y * a).collect();
                rest.push(Ineq {
                    coeffs,
                    c: p.c * b + q.c * a,
                    strict: p.strict || q.strict,
                });
            }
        }
        sys = rest;
    }
    sys.iter().all(|q| if q.strict { zero < q.c } else { zero <= q.c })
}

/// Random square matrix over `1..=max_vars` variables plus the reference.
pub fn random_dbm(rng: &mut StdRng, max_vars: usize) -> Dbm {
    let dim = rng.gen_range(2..=max_vars + 1);
    let mut d = Dbm::unconstrained(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i == j || rng.gen_bool(0.35) {
                continue;
            }
            let v = Rational::new(rng.gen_range(-6..=10), rng.gen_range(1..=2));
            d.set(i, j, if rng.gen_bool(0.25) { Bound::lt(v) } else { Bound::le(v) });
        }
    }
    d
}

/// Random matrix that is satisfied by a random point, hence consistent.
pub fn random_consistent_dbm(rng: &mut StdRng, max_vars: usize) -> Dbm {
    let dim = rng.gen_range(2..=max_vars + 1);
    let point: Vec<Rational> = (0..dim)
        .map(|i| if i == 0 { Rational::from_integer(0) } else { Rational::new(rng.gen_range(0..=20), rng.gen_range(1..=3)) })
        .collect();
    let mut d = Dbm::unconstrained(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i == j || rng.gen_bool(0.3) {
                continue;
            }
            let slack = Rational::new(rng.gen_range(0..=4), 2);
            let v = point[i] - point[j] + slack;
            let b = if slack > Rational::from_integer(0) && rng.gen_bool(0.3) { Bound::lt(v) } else { Bound::le(v) };
            d.set(i, j, b);
        }
    }
    d
}

fn random_interval(rng: &mut StdRng) -> TimeInterval {
    loop {
        let lo = Rational::new(rng.gen_range(0..=12), rng.gen_range(1..=3));
        let upper = match rng.gen_range(0..3) {
            0 => Bound::Infinite,
            1 => Bound::lt(lo + Rational::new(rng.gen_range(0..=9), rng.gen_range(1..=4))),
            _ => Bound::le(lo + Rational::new(rng.gen_range(0..=9), rng.gen_range(1..=4))),
        };
        if let Ok(iv) = TimeInterval::new(lo, rng.gen_bool(0.3), upper) {
            return iv;
        }
    }
}

/// Random net exercising the whole surface syntax: weights, strict and
/// rational endpoints, silent transitions and explicit relations.
pub fn random_syntax_net(rng: &mut StdRng, id: usize) -> Ptpn {
    const CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.'";
    let ident = |rng: &mut StdRng, prefix: &str| -> String {
        let len = rng.gen_range(0..6);
        let tail: String = (0..len).map(|_| *CHARS.choose(rng).unwrap() as char).collect();
        format!("{prefix}{tail}")
    };
    let mut b = NetBuilder::new(ident(rng, &format!("n{id}")));
    let n_places = rng.gen_range(0..6);
    let places: Vec<String> = (0..n_places).map(|i| ident(rng, &format!("p{i}_"))).collect();
    for p in &places {
        let tokens = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..5) };
        b.place(p.clone(), tokens).unwrap();
    }
    let n_trans = if places.is_empty() { 0 } else { rng.gen_range(0..6) };
    for i in 0..n_trans {
        let arcs = |rng: &mut StdRng| -> Vec<(&str, u32)> {
            let k = rng.gen_range(0..=places.len().min(3));
            places.choose_multiple(rng, k).map(|p| (p.as_str(), rng.gen_range(1..4))).collect()
        };
        let pre = arcs(rng);
        let post = arcs(rng);
        let label = if rng.gen_bool(0.3) { None } else { Some(["a", "b", "sync_x", "L.1"][rng.gen_range(0..4)]) };
        let interval = if rng.gen_bool(0.3) { TimeInterval::unbounded() } else { random_interval(rng) };
        b.transition(ident(rng, &format!("t{i}_")), label, interval, &pre, &post).unwrap();
    }
    let net = b.build();
    if rng.gen_bool(0.5) || n_trans == 0 {
        return lift_to_ptpn(net);
    }
    let ids: Vec<TransitionId> = net.transition_ids().collect();
    let mut sets = Vec::new();
    for _ in 0..rng.gen_range(0..4) {
        let k = rng.gen_range(1..=ids.len());
        let pick: Vec<TransitionId> = ids.choose_multiple(rng, k).copied().collect();
        if let Ok(s) = FiringSet::new(&net, pick) {
            sets.push(s);
        }
    }
    Ptpn::new(net, ProductRelation::new(sets)).unwrap()
}
