use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::arith::{fmt_rational, Quadratic, Rational};
use crate::error::{Error, Result};
use crate::instance::{Instance, Variant};

use super::cluster::ClusterState;
use super::trace::{SelectCase, TraceEvent};
use super::{OpenBall, PipelineConfig, RoundedSolution};

/// Selection result for the first half: open balls with their flow over
/// `P1`, plus the `select` trace lines.
pub struct Selection {
    pub solution: RoundedSolution,
    pub events: Vec<TraceEvent>,
}

pub fn select_balls(state: &ClusterState, instance: &Instance, cfg: &PipelineConfig) -> Result<Selection> {
    match instance.variant() {
        Variant::Monotonic => select_balls_monotonic(state, instance, cfg),
        Variant::Uniform => select_balls_uniform(state, instance, cfg),
    }
}

pub fn select_balls_monotonic(state: &ClusterState, instance: &Instance, cfg: &PipelineConfig) -> Result<Selection> {
    select_with(state, instance, cfg, Variant::Monotonic)
}

pub fn select_balls_uniform(state: &ClusterState, instance: &Instance, cfg: &PipelineConfig) -> Result<Selection> {
    select_with(state, instance, cfg, Variant::Uniform)
}

fn select_with(state: &ClusterState, instance: &Instance, cfg: &PipelineConfig, variant: Variant) -> Result<Selection> {
    let mut out = RoundedSolution::default();
    let mut events = Vec::new();
    for &t in &state.opened {
        out.open_ball(
            t,
            OpenBall { expansion: Quadratic::from_int(1), cluster: None, from_o: true, from_o_prime: false },
        );
        for (p, v) in state.solution.row(t) {
            out.add_flow(t, p, v);
        }
    }
    for (&h, members) in &state.clusters {
        let event = select_cluster(state, instance, cfg, variant, h, members, &mut out)?;
        events.push(event);
    }
    for ((b, p), v) in &out.flow {
        let factor = &out.open[b].expansion;
        if !instance.contains_expanded(*b, *p, factor) {
            return Err(Error::Invariant(format!("ball {b} serves point {p} beyond its expansion {factor}")));
        }
        debug_assert!(v.is_positive());
    }
    Ok(Selection { solution: out, events })
}

fn select_cluster(
    state: &ClusterState,
    instance: &Instance,
    cfg: &PipelineConfig,
    variant: Variant,
    h: usize,
    members: &[usize],
    out: &mut RoundedSolution,
) -> Result<TraceEvent> {
    let mut ranked: Vec<usize> = std::iter::once(h).chain(members.iter().copied()).collect();
    ranked.sort_by(|&a, &b| instance.size_order(a, b));
    let rank = ranked.iter().position(|&b| b == h).expect("heavy ball is in its own cluster");
    let k = cfg.top_k;
    let one = Quadratic::from_int(1);
    let three = Quadratic::from_int(3);
    let golden_factor = Quadratic::from_int(1) + cfg.golden_c.clone() + cfg.golden_c.clone();

    // (case, lights keeping their own flow at factor 1, spread lights, heavy factor)
    let (case, kept, spread, spread_factor, heavy_factor): (
        SelectCase,
        &[usize],
        &[usize],
        Quadratic,
        Option<Quadratic>,
    ) = if rank < k {
        (SelectCase::TopRanked, &ranked[..rank], &[], one.clone(), Some(three))
    } else {
        match variant {
            Variant::Monotonic => (SelectCase::Spread, &[], &ranked[..k], Quadratic::from_int(5), None),
            Variant::Uniform => {
                let r_h = &instance.ball(h).radius;
                let r_l = &instance.ball(ranked[k - 1]).radius;
                if cfg.golden_c.bounds(r_l, r_h) {
                    (SelectCase::GoldenHeavy, &ranked[..k - 1], &[], one.clone(), Some(golden_factor))
                } else {
                    (SelectCase::GoldenSpread, &[], &ranked[..k], golden_factor, None)
                }
            }
        }
    };

    // Start from everything the heavy ball holds, then hand absorbed flow
    // back to the selected lights.
    let mut residual: BTreeMap<usize, Rational> = state.solution.row(h).map(|(p, v)| (p, v.clone())).collect();
    let mut load: BTreeMap<usize, Rational> = BTreeMap::new();
    for &l in kept.iter().chain(spread) {
        for (p, v) in state.origin_flow(h, l) {
            out.add_flow(l, p, &v);
            *load.entry(l).or_insert_with(Rational::zero) += &v;
            let r = residual.get_mut(&p).expect("origin flow is part of the heavy flow");
            *r -= v;
        }
    }
    residual.retain(|_, v| !v.is_zero());

    let mut balls = Vec::new();
    let mut factors = Vec::new();
    for &l in kept {
        out.open_ball(l, OpenBall { expansion: one.clone(), cluster: Some(h), from_o: false, from_o_prime: false });
        balls.push(l);
        factors.push(one.clone());
    }
    if let Some(f) = heavy_factor {
        out.open_ball(h, OpenBall { expansion: f.clone(), cluster: Some(h), from_o: false, from_o_prime: false });
        for (p, v) in &residual {
            out.add_flow(h, *p, v);
        }
        balls.push(h);
        factors.push(f);
    } else {
        let mut spread_sorted = spread.to_vec();
        spread_sorted.sort_unstable();
        for &l in &spread_sorted {
            out.open_ball(
                l,
                OpenBall { expansion: spread_factor.clone(), cluster: Some(h), from_o: false, from_o_prime: false },
            );
        }
        for (p, mut left) in residual {
            for &l in &spread_sorted {
                if left.is_zero() {
                    break;
                }
                let used = load.entry(l).or_insert_with(Rational::zero);
                let room = state.capacity(l) - &*used;
                if !room.is_positive() {
                    continue;
                }
                let give = if room < left { room } else { left.clone() };
                out.add_flow(l, p, &give);
                *used += &give;
                left -= give;
            }
            if left.is_positive() {
                return Err(Error::Invariant(format!(
                    "cluster of ball {h} cannot place {} of point {p} on its selected balls",
                    fmt_rational(&left)
                )));
            }
        }
        for &l in spread {
            balls.push(l);
            factors.push(spread_factor.clone());
        }
    }
    Ok(TraceEvent::Select { cluster: h, case, balls, factors })
}
