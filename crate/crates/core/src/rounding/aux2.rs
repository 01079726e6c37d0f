use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::arith::{fmt_rational, rat, Rational};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::FractionalSolution;

use super::reroute::reroute;
use super::trace::TraceEvent;
use super::{PipelineConfig, ScaledCapacities};

/// Rounded second half: the opened set `O'` and the scaled assignment `x'`
/// over `P2`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Aux2Rounding {
    pub o_prime: BTreeSet<usize>,
    pub flow: BTreeMap<(usize, usize), Rational>,
    pub events: Vec<TraceEvent>,
}

impl Aux2Rounding {
    pub fn load(&self, ball: usize) -> Rational {
        self.flow.range((ball, 0)..=(ball, usize::MAX)).map(|(_, v)| v).sum()
    }

    pub fn inflow(&self, point: usize) -> Rational {
        self.flow.iter().filter(|((_, p), _)| *p == point).map(|(_, v)| v).sum()
    }
}

/// Groups fractional light balls around points of `P2` that still receive
/// more than `α` from ungrouped balls, opening the largest ball of each
/// group and rerouting the group's flow to it.
pub fn round_aux2(
    hat2: &FractionalSolution,
    instance: &Instance,
    p2: &[usize],
    caps: &ScaledCapacities,
    cfg: &PipelineConfig,
) -> Result<Aux2Rounding> {
    let mut out = Aux2Rounding::default();
    if p2.is_empty() {
        return Ok(out);
    }
    let alpha = &cfg.alpha;
    let mut sol = hat2.clone();
    let mut s: BTreeSet<usize> = hat2.ys().map(|(b, _)| b).collect();
    let delta: BTreeMap<usize, Rational> = p2.iter().map(|&p| (p, hat2.inflow(p))).collect();

    let from_s =
        |sol: &FractionalSolution, s: &BTreeSet<usize>, p: usize| -> Rational { s.iter().map(|&b| sol.x(b, p)).sum() };

    while let Some(&p) = p2.iter().find(|&&p| from_s(&sol, &s, p) > *alpha) {
        let s_j: Vec<usize> = s.iter().copied().filter(|&b| sol.x(b, p).is_positive()).collect();
        let mut group = Vec::new();
        let mut mass = Rational::zero();
        for &b in &s_j {
            group.push(b);
            mass += sol.y(b);
            if mass >= *alpha {
                break;
            }
        }
        if mass < *alpha || mass > cfg.aux2_group_upper {
            return Err(Error::Invariant(format!(
                "no group around point {p} with opening mass in [α, 21α]; scan reached {}",
                fmt_rational(&mass)
            )));
        }
        let t = *group.iter().min_by(|&&a, &&b| instance.size_order(a, b)).expect("group is non-empty");
        let others: Vec<usize> = group.iter().copied().filter(|&b| b != t).collect();
        let touched: BTreeSet<usize> =
            others.iter().flat_map(|&b| sol.row(b).map(|(q, _)| q).collect::<Vec<_>>()).collect();
        for q in touched {
            let amount: Rational = others.iter().map(|&b| sol.x(b, q)).sum();
            reroute(&mut sol, q, &others, t, &amount)?;
        }
        for &b in &others {
            sol.set_y(b, Rational::zero());
            s.remove(&b);
        }
        sol.set_y(t, Rational::one());
        s.remove(&t);
        out.o_prime.insert(t);

        if sol.flow_out(t) > *caps.get(t) {
            return Err(Error::Invariant(format!("grouped ball {t} exceeds its scaled capacity")));
        }
        let three = rat(3, 1);
        for (q, _) in sol.row(t) {
            if !instance.contains(t, q, &three) {
                return Err(Error::Invariant(format!("ball {t} serves point {q} beyond three times its radius")));
            }
        }
        out.events.push(TraceEvent::Aux2 { point: p, group, open: t });
    }

    let floor = &delta.values().min().cloned().unwrap_or_else(Rational::zero) - alpha;
    let scale = &cfg.aux2_scale;
    let target = scale.recip();
    for &p in p2 {
        let from_o: Rational = out.o_prime.iter().map(|&b| sol.x(b, p)).sum();
        if from_o < target {
            return Err(Error::Invariant(format!(
                "point {p} receives {} from the grouped balls, below 7α (δ − α ≥ {})",
                fmt_rational(&from_o),
                fmt_rational(&floor)
            )));
        }
        let mut excess = -Rational::one();
        let mut row = Vec::new();
        for &b in &out.o_prime {
            let v = sol.x(b, p) * scale;
            if v.is_zero() {
                continue;
            }
            let v = if v > Rational::one() { Rational::one() } else { v };
            excess += &v;
            row.push((b, v));
        }
        for (b, mut v) in row {
            if excess.is_positive() {
                let cut = if v <= excess { v.clone() } else { excess.clone() };
                v -= &cut;
                excess -= cut;
            }
            if !v.is_zero() {
                out.flow.insert((b, p), v);
            }
        }
    }
    for &b in &out.o_prime {
        if out.load(b) > caps.get(b) * scale {
            return Err(Error::Invariant(format!("ball {b} carries more than U'/(7α)")));
        }
    }
    let bound = hat2.cost() / alpha;
    if rat(out.o_prime.len() as i64, 1) > bound {
        return Err(Error::Invariant(format!(
            "|O'| = {} exceeds cost(σ̂)/α = {}",
            out.o_prime.len(),
            fmt_rational(&bound)
        )));
    }
    Ok(out)
}
