//! Line-per-event record of a pipeline run.
//!
//! ```text
//! capcover-trace v1
//! basis <column> ...
//! sigma-star cost=<p/q>
//! heavy id=<id> ac=<p/q>
//! light id=<id> ybar=<p/q>
//! absorb heavy=<id> light=<id> flow=<p/q>
//! discard light=<id>
//! open light=<id> k=<p/q> F=<p/q> case=<1|2|3> from=<id>:<p/q>,...
//! select cluster=<id> case=<1|2|2i|2ii> balls=<ids> factors=<values>
//! drop point=<id> flow=<p/q>
//! aux2 point=<id> group=<ids> open=<id>
//! final cost=<n>
//! ```
//!
//! `heavy` lines carry the starting available capacity of each heavy ball,
//! `light` lines the scaled opening of each first-copy light ball. `from=-`
//! marks an open event that took nothing from heavy balls.

use std::fmt;
use std::str::FromStr;

use crate::arith::{fmt_rational, parse_rational, Quadratic, Rational};
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "capcover-trace v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectCase {
    /// The heavy ball ranks among the top balls of its cluster.
    TopRanked,
    /// Monotonic: the top lights are selected and expanded by 5.
    Spread,
    /// Uniform: top lights but one, plus the heavy ball at 2+√5.
    GoldenHeavy,
    /// Uniform: the top lights, each at 2+√5.
    GoldenSpread,
}

impl fmt::Display for SelectCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectCase::TopRanked => "1",
            SelectCase::Spread => "2",
            SelectCase::GoldenHeavy => "2i",
            SelectCase::GoldenSpread => "2ii",
        })
    }
}

impl FromStr for SelectCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(SelectCase::TopRanked),
            "2" => Ok(SelectCase::Spread),
            "2i" => Ok(SelectCase::GoldenHeavy),
            "2ii" => Ok(SelectCase::GoldenSpread),
            _ => Err(Error::Trace(format!("unknown select case `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Basis(Vec<String>),
    SigmaStar { cost: Rational },
    Heavy { id: usize, ac: Rational },
    Light { id: usize, ybar: Rational },
    Absorb { heavy: usize, light: usize, flow: Rational },
    Discard { light: usize },
    Open { light: usize, k: Rational, f: Rational, case: u8, from: Vec<(usize, Rational)> },
    Select { cluster: usize, case: SelectCase, balls: Vec<usize>, factors: Vec<Quadratic> },
    Drop { point: usize, flow: Rational },
    Aux2 { point: usize, group: Vec<usize>, open: usize },
    Final { cost: usize },
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = fmt_rational;
        match self {
            TraceEvent::Basis(cols) => write!(f, "basis {}", cols.join(" ")),
            TraceEvent::SigmaStar { cost } => write!(f, "sigma-star cost={}", r(cost)),
            TraceEvent::Heavy { id, ac } => write!(f, "heavy id={id} ac={}", r(ac)),
            TraceEvent::Light { id, ybar } => write!(f, "light id={id} ybar={}", r(ybar)),
            TraceEvent::Absorb { heavy, light, flow } => {
                write!(f, "absorb heavy={heavy} light={light} flow={}", r(flow))
            }
            TraceEvent::Discard { light } => write!(f, "discard light={light}"),
            TraceEvent::Open { light, k, f: total, case, from } => {
                let from = if from.is_empty() { "-".to_string() } else { join(from, |(h, v)| format!("{h}:{}", r(v))) };
                write!(f, "open light={light} k={} F={} case={case} from={from}", r(k), r(total))
            }
            TraceEvent::Select { cluster, case, balls, factors } => write!(
                f,
                "select cluster={cluster} case={case} balls={} factors={}",
                join(balls, |b| b.to_string()),
                join(factors, |q| q.to_string())
            ),
            TraceEvent::Drop { point, flow } => write!(f, "drop point={point} flow={}", r(flow)),
            TraceEvent::Aux2 { point, group, open } => {
                write!(f, "aux2 point={point} group={} open={open}", join(group, |b| b.to_string()))
            }
            TraceEvent::Final { cost } => write!(f, "final cost={cost}"),
        }
    }
}

struct Fields<'a> {
    no: usize,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn new(no: usize, rest: &[&'a str], keys: &[&str]) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = rest
            .iter()
            .map(|t| t.split_once('=').ok_or_else(|| Error::Trace(format!("line {no}: `{t}` is not key=value"))))
            .collect::<Result<_>>()?;
        let found: Vec<&str> = pairs.iter().map(|(k, _)| *k).collect();
        if found != keys {
            return Err(Error::Trace(format!("line {no}: expected fields {keys:?}, found {found:?}")));
        }
        Ok(Fields { no, pairs })
    }

    fn raw(&self, i: usize) -> &'a str {
        self.pairs[i].1
    }

    fn id(&self, i: usize) -> Result<usize> {
        self.raw(i).parse().map_err(|_| Error::Trace(format!("line {}: bad id `{}`", self.no, self.raw(i))))
    }

    fn rational(&self, i: usize) -> Result<Rational> {
        parse_rational(self.raw(i)).map_err(|e| Error::Trace(format!("line {}: {e}", self.no)))
    }

    fn ids(&self, i: usize) -> Result<Vec<usize>> {
        let raw = self.raw(i);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',').map(|t| t.parse().map_err(|_| Error::Trace(format!("line {}: bad id `{t}`", self.no)))).collect()
    }
}

impl TraceEvent {
    fn parse(no: usize, line: &str) -> Result<Self> {
        let tokens: Vec<&str> = line.split(' ').collect();
        let (kw, rest) = tokens.split_first().expect("split yields at least one token");
        let fields = |keys: &[&str]| Fields::new(no, rest, keys);
        Ok(match *kw {
            "basis" => TraceEvent::Basis(rest.iter().map(|s| s.to_string()).collect()),
            "sigma-star" => TraceEvent::SigmaStar { cost: fields(&["cost"])?.rational(0)? },
            "heavy" => {
                let f = fields(&["id", "ac"])?;
                TraceEvent::Heavy { id: f.id(0)?, ac: f.rational(1)? }
            }
            "light" => {
                let f = fields(&["id", "ybar"])?;
                TraceEvent::Light { id: f.id(0)?, ybar: f.rational(1)? }
            }
            "absorb" => {
                let f = fields(&["heavy", "light", "flow"])?;
                TraceEvent::Absorb { heavy: f.id(0)?, light: f.id(1)?, flow: f.rational(2)? }
            }
            "discard" => TraceEvent::Discard { light: fields(&["light"])?.id(0)? },
            "open" => {
                let f = fields(&["light", "k", "F", "case", "from"])?;
                let case: u8 = match f.raw(3) {
                    "1" => 1,
                    "2" => 2,
                    "3" => 3,
                    other => return Err(Error::Trace(format!("line {no}: unknown open case `{other}`"))),
                };
                let from = match f.raw(4) {
                    "-" => Vec::new(),
                    raw => raw
                        .split(',')
                        .map(|part| {
                            let (h, v) = part
                                .split_once(':')
                                .ok_or_else(|| Error::Trace(format!("line {no}: bad heavy share `{part}`")))?;
                            let h = h.parse().map_err(|_| Error::Trace(format!("line {no}: bad id `{h}`")))?;
                            let v = parse_rational(v).map_err(|e| Error::Trace(format!("line {no}: {e}")))?;
                            Ok((h, v))
                        })
                        .collect::<Result<_>>()?,
                };
                TraceEvent::Open { light: f.id(0)?, k: f.rational(1)?, f: f.rational(2)?, case, from }
            }
            "select" => {
                let f = fields(&["cluster", "case", "balls", "factors"])?;
                let factors = if f.raw(3).is_empty() {
                    Vec::new()
                } else {
                    f.raw(3)
                        .split(',')
                        .map(|q| q.parse().map_err(|e: Error| Error::Trace(format!("line {no}: {e}"))))
                        .collect::<Result<_>>()?
                };
                TraceEvent::Select { cluster: f.id(0)?, case: f.raw(1).parse()?, balls: f.ids(2)?, factors }
            }
            "drop" => {
                let f = fields(&["point", "flow"])?;
                TraceEvent::Drop { point: f.id(0)?, flow: f.rational(1)? }
            }
            "aux2" => {
                let f = fields(&["point", "group", "open"])?;
                TraceEvent::Aux2 { point: f.id(0)?, group: f.ids(1)?, open: f.id(2)? }
            }
            "final" => TraceEvent::Final { cost: fields(&["cost"])?.id(0)? },
            other => return Err(Error::Trace(format!("line {no}: unknown event `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn render(&self) -> String {
        let mut out = format!("{TRACE_HEADER}\n");
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn parse_trace(text: &str) -> Result<Trace> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, TRACE_HEADER)) => {}
        _ => return Err(Error::Trace(format!("missing `{TRACE_HEADER}` header"))),
    }
    let events = lines.map(|(i, l)| TraceEvent::parse(i + 1, l)).collect::<Result<_>>()?;
    Ok(Trace { events })
}
