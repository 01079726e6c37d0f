//! Line-oriented instance files.
//!
//! ```text
//! capcover-instance v1
//! variant uniform|monotonic
//! points N
//! dist
//! <N rows of N canonical p/q rationals>
//! [demand i1 i2 ...]
//! balls M
//! <M lines: id center radius capacity>
//! ```
//!
//! The `demand` line is only present when not every site needs coverage.

use std::fmt::Write as _;

use crate::arith::{fmt_rational, parse_rational};
use crate::error::{Error, Result};

use super::{Ball, Instance, MetricSpace};

pub const INSTANCE_HEADER: &str = "capcover-instance v1";

pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let n = instance.space().len();
    writeln!(out, "{INSTANCE_HEADER}").unwrap();
    writeln!(out, "variant {}", instance.variant()).unwrap();
    writeln!(out, "points {n}").unwrap();
    writeln!(out, "dist").unwrap();
    for i in 0..n {
        writeln!(out, "{}", instance.space().render_row(i)).unwrap();
    }
    if !instance.demand_is_everything() {
        let ids: Vec<String> = instance.demand().iter().map(|p| p.to_string()).collect();
        writeln!(out, "demand {}", ids.join(" ")).unwrap();
    }
    writeln!(out, "balls {}", instance.balls().len()).unwrap();
    for b in instance.balls() {
        writeln!(out, "{} {} {} {}", b.id, b.center, fmt_rational(&b.radius), b.capacity).unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))
    }

    fn keyword(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (no, line) = self.next(key)?;
        match line.strip_prefix(key).and_then(|r| r.strip_prefix(' ')) {
            Some(rest) => Ok((no, rest)),
            None => Err(Error::Parse(format!("line {no}: expected `{key} ...`, found `{line}`"))),
        }
    }
}

fn parse_count(text: &str, no: usize) -> Result<usize> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("line {no}: `{text}` is not a count")));
    }
    text.parse().map_err(|_| Error::Parse(format!("line {no}: `{text}` is not a count")))
}

fn fields(line: &str, no: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = line.split(' ').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("line {no}: fields must be separated by single spaces")));
    }
    Ok(parts)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (no, header) = lines.next("header")?;
    if header != INSTANCE_HEADER {
        return Err(Error::Parse(format!("line {no}: expected `{INSTANCE_HEADER}`")));
    }
    let (_, variant) = lines.keyword("variant")?;
    let variant = variant.parse()?;
    let (no, n) = lines.keyword("points")?;
    let n = parse_count(n, no)?;
    let (no, dist_kw) = lines.next("dist")?;
    if dist_kw != "dist" {
        return Err(Error::Parse(format!("line {no}: expected `dist`")));
    }
    let mut dist = Vec::with_capacity(n);
    for _ in 0..n {
        let (no, row) = lines.next("distance row")?;
        let row = fields(row, no)?
            .into_iter()
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Parse(format!("line {no}: {e}")))?;
        if row.len() != n {
            return Err(Error::Parse(format!("line {no}: expected {n} distances, found {}", row.len())));
        }
        dist.push(row);
    }
    let space = MetricSpace::new(dist).map_err(Error::Metric)?;

    let (no, line) = lines.next("`demand` or `balls`")?;
    let (demand, balls_line) = if let Some(rest) = line.strip_prefix("demand ") {
        let ids = fields(rest, no)?.into_iter().map(|t| parse_count(t, no)).collect::<Result<Vec<_>>>()?;
        (Some(ids), lines.next("balls")?)
    } else {
        (None, (no, line))
    };
    let (no, line) = balls_line;
    let m = line.strip_prefix("balls ").ok_or_else(|| Error::Parse(format!("line {no}: expected `balls M`")))?;
    let m = parse_count(m, no)?;
    let mut balls = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, line) = lines.next("ball line")?;
        let parts = fields(line, no)?;
        if parts.len() != 4 {
            return Err(Error::Parse(format!("line {no}: expected `id center radius capacity`")));
        }
        balls.push(Ball {
            id: parse_count(parts[0], no)?,
            center: parse_count(parts[1], no)?,
            radius: parse_rational(parts[2]).map_err(|e| Error::Parse(format!("line {no}: {e}")))?,
            capacity: parse_count(parts[3], no)? as u64,
        });
    }
    if let Some((no, extra)) = lines.inner.next() {
        return Err(Error::Parse(format!("line {}: trailing content `{extra}`", no + 1)));
    }
    match demand {
        Some(d) => Instance::with_demand(space, balls, variant, d),
        None => Instance::new(space, balls, variant),
    }
}
