//! Textual net format and composition manifests.
//!
//! Net files are line oriented; `#` starts a comment:
//!
//! ```text
//! net example
//! pl p0 (1)
//! pl p1
//! tr t0 : a [3,w[ p0 -> p1
//! tr t1 [0,2] p1*2 -> p0
//! sync t0 t2
//! ```
//!
//! `pl <place> [(<tokens>)]` declares a place, `tr <name> [: <label>]
//! [<interval>] <inputs> -> <outputs>` a transition (arc weight after `*`,
//! default 1). Intervals are `[a,b]`, `]a,b]`, `[a,b[`, `]a,b[` with
//! non-negative integers or fractions `p/q`; `w` stands for an unbounded
//! upper endpoint and is only allowed as `...,w[`. A missing interval means
//! `[0,w[`.
//!
//! Without `sync` lines the product relation holds one singleton per
//! transition. As soon as one `sync` line appears the relation is exactly
//! the declared sets; a bare `sync` line declares no set but still makes the
//! relation explicit (so an empty relation can be written down).
//!
//! Manifests list the components of an incremental product:
//!
//! ```text
//! component manager.net
//! component factory.net
//! sync-labels POK0 MOD_BAZ_S0
//! component supplier0.net
//! ```
//!
//! A `sync-labels` line sets the synchronisation labels of the step adding
//! the next component; steps without one synchronise on the intersection of
//! the operands' alphabets.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{lift_to_ptpn, FiringSet, FiringSetViolation, NetBuilder, ProductRelation, Ptpn};
use crate::time::{Bound, IntervalError, Rational, TimeInterval};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("empty interval {0}")]
    EmptyInterval(String),
    #[error("negative token count for place `{0}`")]
    NegativeTokens(String),
    #[error("invalid firing set: {0}")]
    InvalidFiringSet(FiringSetViolation),
    #[error("manifest lists no component")]
    MissingComponent,
}

/// A diagnostic with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }

    fn syntax(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Self::new(line, column, ParseErrorKind::Syntax(msg.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Colon,
    Arrow,
    Star,
    LParen,
    RParen,
    Interval(TimeInterval),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Star => write!(f, "`*`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Interval(i) => write!(f, "interval `{i}`"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'')
}

/// Splits one (comment-stripped) line into tokens with their columns.
fn lex_line(line_no: usize, text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            ':' => {
                out.push((col, Tok::Colon));
                i += 1;
            }
            '*' => {
                out.push((col, Tok::Star));
                i += 1;
            }
            '(' => {
                out.push((col, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((col, Tok::RParen));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((col, Tok::Arrow));
                i += 2;
            }
            '-' if chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s
                    .parse()
                    .map_err(|_| ParseError::syntax(line_no, col, format!("number `{s}` out of range")))?;
                out.push((col, Tok::Int(n)));
            }
            '[' | ']' => {
                let (interval, next) = lex_interval(line_no, &chars, i)?;
                out.push((col, Tok::Interval(interval)));
                i = next;
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                if s.chars().all(|d| d.is_ascii_digit()) {
                    let n = s
                        .parse()
                        .map_err(|_| ParseError::syntax(line_no, col, format!("number `{s}` out of range")))?;
                    out.push((col, Tok::Int(n)));
                } else {
                    out.push((col, Tok::Ident(s)));
                }
            }
            other => {
                return Err(ParseError::syntax(
                    line_no,
                    col,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(out)
}

fn lex_interval(line_no: usize, chars: &[char], start: usize) -> Result<(TimeInterval, usize), ParseError> {
    let col = start + 1;
    let lower_strict = chars[start] == ']';
    let mut i = start + 1;
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    skip_ws(&mut i);
    let (lower, next) = lex_rational(line_no, chars, i)?
        .ok_or_else(|| ParseError::syntax(line_no, i + 1, "expected lower bound of interval"))?;
    i = next;
    skip_ws(&mut i);
    if chars.get(i) != Some(&',') {
        return Err(ParseError::syntax(line_no, i + 1, "expected `,` in interval"));
    }
    i += 1;
    skip_ws(&mut i);
    let upper_value = if chars.get(i) == Some(&'w') {
        i += 1;
        None
    } else {
        let (v, next) = lex_rational(line_no, chars, i)?
            .ok_or_else(|| ParseError::syntax(line_no, i + 1, "expected upper bound of interval"))?;
        i = next;
        Some(v)
    };
    skip_ws(&mut i);
    let close = chars
        .get(i)
        .copied()
        .filter(|c| *c == '[' || *c == ']')
        .ok_or_else(|| ParseError::syntax(line_no, i + 1, "expected `]` or `[` closing interval"))?;
    i += 1;
    let upper = match upper_value {
        None if close == '[' => Bound::Infinite,
        None => {
            return Err(ParseError::syntax(
                line_no,
                i,
                "unbounded interval must be open on the right (`w[`)",
            ))
        }
        Some(v) if close == '[' => Bound::lt(v),
        Some(v) => Bound::le(v),
    };
    let text: String = chars[start..i].iter().collect();
    let interval = TimeInterval::new(lower, lower_strict, upper).map_err(|e| match e {
        IntervalError::Empty => ParseError::new(line_no, col, ParseErrorKind::EmptyInterval(text.clone())),
        IntervalError::InvalidLower => ParseError::syntax(line_no, col, format!("invalid interval {text}")),
    })?;
    Ok((interval, i))
}

/// `digits` or `digits/digits`.
fn lex_rational(line_no: usize, chars: &[char], start: usize) -> Result<Option<(Rational, usize)>, ParseError> {
    let digits = |mut i: usize| {
        let s = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        (s, i)
    };
    let (s, e) = digits(start);
    if s == e {
        return Ok(None);
    }
    let num_text: String = chars[s..e].iter().collect();
    let num: i64 = num_text
        .parse()
        .map_err(|_| ParseError::syntax(line_no, start + 1, "number out of range"))?;
    if chars.get(e) == Some(&'/') {
        let (ds, de) = digits(e + 1);
        if ds == de {
            return Err(ParseError::syntax(line_no, e + 2, "expected denominator"));
        }
        let den_text: String = chars[ds..de].iter().collect();
        let den: i64 = den_text
            .parse()
            .map_err(|_| ParseError::syntax(line_no, ds + 1, "number out of range"))?;
        if den == 0 {
            return Err(ParseError::syntax(line_no, ds + 1, "zero denominator"));
        }
        return Ok(Some((Rational::new(num, den), de)));
    }
    Ok(Some((Rational::from_integer(num), e)))
}

fn strip_comment(line: &str) -> &str {
    let line = line.strip_suffix('\r').unwrap_or(line);
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

struct Tokens<'a> {
    line: usize,
    toks: &'a [(usize, Tok)],
    pos: usize,
    end_col: usize,
}

impl<'a> Tokens<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn ident(&mut self, what: &str) -> Result<(usize, String), ParseError> {
        let col = self.col();
        match self.next() {
            Some((c, Tok::Ident(s))) => Ok((c, s)),
            Some((c, Tok::Int(n))) => Ok((c, n.to_string())),
            Some((c, t)) => Err(ParseError::syntax(self.line, c, format!("expected {what}, found {t}"))),
            None => Err(ParseError::syntax(self.line, col, format!("expected {what}"))),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some((c, t)) => Err(ParseError::syntax(self.line, *c, format!("unexpected {t}"))),
            None => Ok(()),
        }
    }
}

struct Located<T> {
    line: usize,
    col: usize,
    value: T,
}

struct ArcDecl {
    place: Located<String>,
    weight: u32,
}

struct TransitionDecl {
    name: Located<String>,
    label: Option<String>,
    interval: TimeInterval,
    pre: Vec<ArcDecl>,
    post: Vec<ArcDecl>,
}

fn parse_arc(toks: &mut Tokens<'_>) -> Result<ArcDecl, ParseError> {
    let (col, place) = toks.ident("place name")?;
    let mut weight = 1;
    if toks.peek() == Some(&Tok::Star) {
        toks.next();
        let wcol = toks.col();
        match toks.next() {
            Some((_, Tok::Int(n))) if n >= 1 && n <= u32::MAX as i64 => weight = n as u32,
            Some((c, Tok::Int(_))) => {
                return Err(ParseError::syntax(toks.line, c, "arc weight must be a positive integer"))
            }
            _ => return Err(ParseError::syntax(toks.line, wcol, "expected arc weight after `*`")),
        }
    }
    Ok(ArcDecl {
        place: Located {
            line: toks.line,
            col,
            value: place,
        },
        weight,
    })
}

/// Parses a net file into a product net.
pub fn parse_net(text: &str) -> Result<Ptpn, ParseError> {
    let mut name: Option<String> = None;
    let mut places: Vec<(Located<String>, u32)> = Vec::new();
    let mut transitions: Vec<TransitionDecl> = Vec::new();
    let mut syncs: Vec<Vec<Located<String>>> = Vec::new();
    let mut explicit_relation = false;

    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        let lexed = lex_line(line, body)?;
        if lexed.is_empty() {
            continue;
        }
        let mut toks = Tokens {
            line,
            toks: &lexed,
            pos: 0,
            end_col: body.chars().count() + 1,
        };
        let (kcol, keyword) = toks.ident("keyword")?;
        match keyword.as_str() {
            "net" => {
                if name.is_some() {
                    return Err(ParseError::syntax(line, kcol, "second `net` declaration"));
                }
                let (_, n) = toks.ident("net name")?;
                toks.expect_end()?;
                name = Some(n);
            }
            "pl" => {
                let (col, p) = toks.ident("place name")?;
                let mut tokens = 0u32;
                if toks.peek() == Some(&Tok::LParen) {
                    toks.next();
                    let ncol = toks.col();
                    match toks.next() {
                        Some((_, Tok::Int(n))) if n < 0 => {
                            return Err(ParseError::new(line, ncol, ParseErrorKind::NegativeTokens(p)))
                        }
                        Some((_, Tok::Int(n))) if n <= u32::MAX as i64 => tokens = n as u32,
                        _ => return Err(ParseError::syntax(line, ncol, "expected token count")),
                    }
                    match toks.next() {
                        Some((_, Tok::RParen)) => {}
                        _ => return Err(ParseError::syntax(line, toks.col(), "expected `)`")),
                    }
                }
                toks.expect_end()?;
                places.push((Located { line, col, value: p }, tokens));
            }
            "tr" => {
                let (col, t) = toks.ident("transition name")?;
                let mut label = None;
                if toks.peek() == Some(&Tok::Colon) {
                    toks.next();
                    label = Some(toks.ident("label")?.1);
                }
                let mut interval = TimeInterval::unbounded();
                if let Some(Tok::Interval(i)) = toks.peek() {
                    interval = *i;
                    toks.next();
                }
                let mut pre = Vec::new();
                while !matches!(toks.peek(), Some(Tok::Arrow) | None) {
                    pre.push(parse_arc(&mut toks)?);
                }
                if toks.next().is_none() {
                    return Err(ParseError::syntax(line, toks.end_col, "expected `->`"));
                }
                let mut post = Vec::new();
                while toks.peek().is_some() {
                    post.push(parse_arc(&mut toks)?);
                }
                transitions.push(TransitionDecl {
                    name: Located { line, col, value: t },
                    label,
                    interval,
                    pre,
                    post,
                });
            }
            "sync" => {
                explicit_relation = true;
                let mut members = Vec::new();
                while toks.peek().is_some() {
                    let (col, t) = toks.ident("transition name")?;
                    members.push(Located { line, col, value: t });
                }
                if !members.is_empty() {
                    syncs.push(members);
                }
            }
            other => {
                return Err(ParseError::syntax(
                    line,
                    kcol,
                    format!("unknown declaration `{other}` (expected net, pl, tr or sync)"),
                ))
            }
        }
    }

    let mut builder = NetBuilder::new(name.unwrap_or_else(|| "net".to_string()));
    for (p, tokens) in &places {
        builder
            .place(p.value.clone(), *tokens)
            .map_err(|_| ParseError::new(p.line, p.col, ParseErrorKind::DuplicateName(p.value.clone())))?;
    }
    let mut seen = HashSet::new();
    for t in &transitions {
        if !seen.insert(t.name.value.as_str()) {
            return Err(ParseError::new(
                t.name.line,
                t.name.col,
                ParseErrorKind::DuplicateName(t.name.value.clone()),
            ));
        }
        let pre = resolve_arcs(&builder, &t.pre)?;
        let post = resolve_arcs(&builder, &t.post)?;
        builder
            .transition(t.name.value.clone(), t.label.as_deref(), t.interval, &pre, &post)
            .map_err(|e| ParseError::syntax(t.name.line, t.name.col, e.to_string()))?;
    }
    let net = builder.build();

    if !explicit_relation {
        return Ok(lift_to_ptpn(net));
    }
    let mut sets = Vec::new();
    let mut declared = HashSet::new();
    for members in &syncs {
        let mut ids = Vec::new();
        for m in members {
            let id = net.transition_id(&m.value).ok_or_else(|| {
                ParseError::new(m.line, m.col, ParseErrorKind::UnknownReference(m.value.clone()))
            })?;
            ids.push(id);
        }
        let first = &members[0];
        let set = FiringSet::new(&net, ids)
            .map_err(|v| ParseError::new(first.line, first.col, ParseErrorKind::InvalidFiringSet(v)))?;
        if !declared.insert(set.clone()) {
            let names = set.names(&net).join(" ");
            return Err(ParseError::new(first.line, first.col, ParseErrorKind::DuplicateName(names)));
        }
        sets.push(set);
    }
    Ok(Ptpn::new(net, ProductRelation::new(sets)).expect("firing sets validated above"))
}

fn resolve_arcs<'a>(builder: &NetBuilder, arcs: &'a [ArcDecl]) -> Result<Vec<(&'a str, u32)>, ParseError> {
    arcs.iter()
        .map(|a| {
            if builder.place_id(&a.place.value).is_none() {
                Err(ParseError::new(
                    a.place.line,
                    a.place.col,
                    ParseErrorKind::UnknownReference(a.place.value.clone()),
                ))
            } else {
                Ok((a.place.value.as_str(), a.weight))
            }
        })
        .collect()
}

/// Writes a product net in canonical form: places, then transitions, in
/// declaration order; `sync` lines only when the relation is not the
/// singleton lifting.
pub fn serialize_net(ptpn: &Ptpn) -> String {
    let net = ptpn.net();
    let mut out = String::new();
    writeln!(out, "net {}", net.name()).unwrap();
    for (i, p) in net.places().iter().enumerate() {
        let tokens = net.initial_marking().as_slice()[i];
        if tokens == 0 {
            writeln!(out, "pl {p}").unwrap();
        } else {
            writeln!(out, "pl {p} ({tokens})").unwrap();
        }
    }
    let arcs = |arcs: &[(crate::model::PlaceId, u32)]| -> String {
        arcs.iter()
            .map(|&(p, w)| {
                if w == 1 {
                    net.place_name(p).to_string()
                } else {
                    format!("{}*{}", net.place_name(p), w)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    for t in net.transitions() {
        let mut line = format!("tr {}", t.name);
        if let Some(l) = &t.label {
            write!(line, " : {l}").unwrap();
        }
        if !t.interval.is_default() {
            write!(line, " {}", t.interval).unwrap();
        }
        let pre = arcs(&t.pre);
        if !pre.is_empty() {
            write!(line, " {pre}").unwrap();
        }
        line.push_str(" ->");
        let post = arcs(&t.post);
        if !post.is_empty() {
            write!(line, " {post}").unwrap();
        }
        writeln!(out, "{line}").unwrap();
    }
    if !ptpn.is_lifted() {
        if ptpn.relation().is_empty() {
            writeln!(out, "sync").unwrap();
        }
        for set in ptpn.relation().sets() {
            writeln!(out, "sync {}", set.names(net).join(" ")).unwrap();
        }
    }
    out
}

/// Which labels synchronise when a component joins the product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyncPolicy {
    /// Labels common to both operands.
    Intersection,
    /// Exactly these labels.
    Labels(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestComponent {
    pub path: String,
    /// Policy for the step adding this component; ignored for the first one.
    pub policy: SyncPolicy,
}

/// Ordered components of an incremental product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionManifest {
    pub components: Vec<ManifestComponent>,
}

impl CompositionManifest {
    pub fn new(components: Vec<ManifestComponent>) -> Result<Self, ParseErrorKind> {
        if components.is_empty() {
            return Err(ParseErrorKind::MissingComponent);
        }
        Ok(CompositionManifest { components })
    }
}

/// Parses a composition manifest.
pub fn parse_manifest(text: &str) -> Result<CompositionManifest, ParseError> {
    let mut components = Vec::new();
    let mut pending: Option<(usize, usize, Vec<String>)> = None;
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = body.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;
        let mut words = trimmed.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        match keyword {
            "component" => {
                let rest: Vec<&str> = words.collect();
                if rest.len() != 1 {
                    return Err(ParseError::syntax(line, col, "expected `component <path>`"));
                }
                let policy = match pending.take() {
                    Some((_, _, labels)) => SyncPolicy::Labels(labels),
                    None => SyncPolicy::Intersection,
                };
                components.push(ManifestComponent {
                    path: rest[0].to_string(),
                    policy,
                });
            }
            "sync-labels" => {
                if components.is_empty() {
                    return Err(ParseError::syntax(
                        line,
                        col,
                        "`sync-labels` must follow the first component",
                    ));
                }
                if pending.is_some() {
                    return Err(ParseError::syntax(line, col, "two `sync-labels` lines for one step"));
                }
                let labels: Vec<String> = words.map(str::to_string).collect();
                if let Some(bad) = labels.iter().find(|l| !l.chars().all(is_ident_char)) {
                    return Err(ParseError::syntax(line, col, format!("invalid label `{bad}`")));
                }
                pending = Some((line, col, labels));
            }
            other => {
                return Err(ParseError::syntax(
                    line,
                    col,
                    format!("unknown manifest entry `{other}` (expected component or sync-labels)"),
                ))
            }
        }
    }
    if let Some((line, col, _)) = pending {
        return Err(ParseError::syntax(line, col, "`sync-labels` is not followed by a component"));
    }
    CompositionManifest::new(components).map_err(|kind| ParseError::new(1, 1, kind))
}

pub fn serialize_manifest(manifest: &CompositionManifest) -> String {
    let mut out = String::new();
    for (i, c) in manifest.components.iter().enumerate() {
        if i > 0 {
            if let SyncPolicy::Labels(labels) = &c.policy {
                writeln!(out, "sync-labels {}", labels.join(" ")).unwrap();
            }
        }
        writeln!(out, "component {}", c.path).unwrap();
    }
    out
}
