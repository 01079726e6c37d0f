//! Test-side generators and oracles. Nothing here calls the simplex or the
//! rounding code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use capcover::arith::{rat, Quadratic, Rational};
use capcover::assignment::assign_integrally;
use capcover::instance::{generate_random, Instance, Variant};
use capcover::lp::FractionalSolution;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Seeded desk-scale instances: 4 to 8 points, 3 to 6 balls.
pub fn suite(variant: Variant, count: u64) -> Vec<Instance> {
    (0..count)
        .map(|seed| {
            let points = 4 + (seed % 5) as usize;
            let balls = 3 + ((seed / 5) % 4) as usize;
            generate_random(points, balls, variant, seed).expect("suite instance")
        })
        .collect()
}

/// A feasible but non-optimal fractional solution with light balls.
///
/// Opens a random integral cover at `y = 1`, then shifts part of each
/// point's flow onto other balls opened at a fraction of `alpha`. Each point
/// keeps at least half its flow on its heavy ball.
pub fn synthetic(inst: &Instance, rng: &mut ChaCha8Rng) -> FractionalSolution {
    let mut order: Vec<usize> = (0..inst.balls().len()).collect();
    order.shuffle(rng);
    let mut open = Vec::new();
    let mut assign = None;
    for b in order {
        open.push((b, Quadratic::from_int(1)));
        if let Ok(a) = assign_integrally(inst, &open) {
            assign = Some(a);
            break;
        }
    }
    let a = assign.expect("every generated instance is feasible with all balls open");
    let heavy: BTreeSet<usize> = a.open.keys().copied().collect();
    let mut s = FractionalSolution::new();
    for &h in &heavy {
        s.set_y(h, Rational::one());
    }
    for (&p, &b) in &a.assign {
        s.set_x(b, p, Rational::one());
    }
    let alpha = rat(1, 60);
    for l in 0..inst.balls().len() {
        if heavy.contains(&l) || rng.random_bool(0.2) {
            continue;
        }
        let y = &alpha * rat(rng.random_range(1..=4), 4);
        let room = &y * inst.ball(l).capacity_rational();
        let mut used = Rational::zero();
        let mut pts: Vec<usize> =
            inst.demand().iter().copied().filter(|&p| inst.contains(l, p, &Rational::one())).collect();
        pts.shuffle(rng);
        for p in pts {
            let h = a.assign[&p];
            let give = y.clone().min(&room - &used).min(s.x(h, p) - rat(1, 2));
            if give <= Rational::zero() {
                continue;
            }
            s.set_x(h, p, s.x(h, p) - &give);
            s.set_x(l, p, give.clone());
            used += give;
        }
        if !used.is_zero() {
            s.set_y(l, y);
        }
    }
    s
}

/// Optimum of the natural relaxation by vertex enumeration over `y` alone.
///
/// For fixed `y` the flow part is feasible iff every demand subset `A`
/// satisfies `Σ_i y_i·min(U_i, |A ∩ B_i|) ≥ |A|` (max-flow min-cut on the
/// source/point/ball/sink network with arc capacities 1, `y_i` and
/// `U_i·y_i`). Together with `0 ≤ y ≤ 1` that is a polytope in as many
/// dimensions as there are balls. Its vertices are enumerated by the
/// double-description method starting from the unit box, and the minimum of
/// `Σ y` is taken over them. Returns `None` when the polytope is empty.
pub fn lp_by_vertices(inst: &Instance) -> Option<Rational> {
    vertices(inst).map(|vs| vs.iter().map(|v| v.iter().sum::<Rational>()).min().expect("a polytope has a vertex"))
}

/// Rows `a·y ≥ b` of the projected relaxation: the box first, then the
/// undominated cut rows.
pub fn projected_rows(inst: &Instance) -> Vec<(Vec<i64>, i64)> {
    let n = inst.balls().len();
    let demand = inst.demand();
    let members: Vec<Vec<usize>> = inst
        .balls()
        .iter()
        .map(|b| (0..demand.len()).filter(|&j| inst.contains(b.id, demand[j], &Rational::one())).collect())
        .collect();
    let mut cuts: Vec<(Vec<i64>, i64)> = Vec::new();
    for mask in 1u64..(1 << demand.len()) {
        let coeffs: Vec<i64> = (0..n)
            .map(|i| {
                let hit = members[i].iter().filter(|&&j| mask >> j & 1 == 1).count() as i64;
                hit.min(inst.ball(i).capacity as i64)
            })
            .collect();
        cuts.push((coeffs, mask.count_ones() as i64));
    }
    // `c` is implied by `d` when `d` has no larger coefficients and no
    // smaller right-hand side (all `y ≥ 0`).
    let implies = |d: &(Vec<i64>, i64), c: &(Vec<i64>, i64)| d.0.iter().zip(&c.0).all(|(x, y)| x <= y) && d.1 >= c.1;
    let mut rows: Vec<(Vec<i64>, i64)> = Vec::new();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        rows.push((e.clone(), 0));
        e[i] = -1;
        rows.push((e, -1));
    }
    for (k, c) in cuts.iter().enumerate() {
        let redundant = cuts.iter().enumerate().any(|(l, d)| l != k && implies(d, c) && (d != c || l < k));
        if !redundant {
            rows.push(c.clone());
        }
    }
    rows
}

type Incidence = Vec<u64>;

fn subset(a: &Incidence, b: &Incidence) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// All vertices of the projected polytope, or `None` if it is empty.
pub fn vertices(inst: &Instance) -> Option<Vec<Vec<Rational>>> {
    let n = inst.balls().len();
    let rows = projected_rows(inst);
    let words = rows.len().div_ceil(64);
    let set = |inc: &mut Incidence, r: usize| inc[r / 64] |= 1 << (r % 64);
    let r_of = |x: i64| Rational::from_integer(x.into());

    let mut verts: Vec<(Vec<Rational>, Incidence)> = Vec::new();
    for corner in 0u32..(1 << n) {
        let mut inc = vec![0; words];
        let y: Vec<Rational> = (0..n)
            .map(|i| {
                let one = corner >> i & 1 == 1;
                set(&mut inc, 2 * i + usize::from(one));
                if one {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        verts.push((y, inc));
    }
    for (h, (a, b)) in rows.iter().enumerate().skip(2 * n) {
        let slack: Vec<Rational> = verts
            .iter()
            .map(|(y, _)| a.iter().zip(y).map(|(&c, v)| r_of(c) * v).sum::<Rational>() - r_of(*b))
            .collect();
        let mut next = Vec::new();
        for (k, (y, inc)) in verts.iter().enumerate() {
            if slack[k] >= Rational::zero() {
                let mut inc = inc.clone();
                if slack[k].is_zero() {
                    set(&mut inc, h);
                }
                next.push((y.clone(), inc));
            }
        }
        for (u, (yu, iu)) in verts.iter().enumerate() {
            if slack[u] <= Rational::zero() {
                continue;
            }
            for (w, (yw, iw)) in verts.iter().enumerate() {
                if slack[w] >= Rational::zero() {
                    continue;
                }
                let common: Incidence = iu.iter().zip(iw).map(|(x, y)| x & y).collect();
                if common.iter().map(|x| x.count_ones() as usize).sum::<usize>() + 1 < n {
                    continue;
                }
                let adjacent = verts.iter().enumerate().all(|(v, (_, iv))| v == u || v == w || !subset(&common, iv));
                if !adjacent {
                    continue;
                }
                let t = &slack[u] / (&slack[u] - &slack[w]);
                let y: Vec<Rational> = yu.iter().zip(yw).map(|(p, q)| p + &t * (q - p)).collect();
                let mut inc = common;
                set(&mut inc, h);
                next.push((y, inc));
            }
        }
        if next.is_empty() {
            return None;
        }
        verts = next;
    }
    Some(verts.into_iter().map(|(y, _)| y).collect())
}

/// Minimum number of sets covering `0..universe`, by bitmask enumeration.
pub fn min_set_cover(universe: usize, sets: &[Vec<usize>]) -> Option<usize> {
    let full: u64 = (1u64 << universe) - 1;
    let masks: Vec<u64> = sets.iter().map(|s| s.iter().fold(0u64, |m, &e| m | 1 << e)).collect();
    (0u64..1 << sets.len())
        .filter(|chosen| {
            masks.iter().enumerate().filter(|(i, _)| chosen >> i & 1 == 1).fold(0, |m, (_, s)| m | s) == full
        })
        .map(|chosen| chosen.count_ones() as usize)
        .min()
}
