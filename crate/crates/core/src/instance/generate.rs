use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{int, Quadratic};
use crate::assignment::max_assignable;
use crate::error::{Error, Result};

use super::{Ball, Instance, MetricSpace, Variant};

const RETRY_BUDGET: u64 = 256;

/// Random instance on distinct integer grid points under the ℓ1 metric.
///
/// Deterministic in `seed`. Every point is covered at expansion 1 and the
/// instance admits a capacity-feasible assignment when all balls are open;
/// attempts that miss either property are discarded and redrawn.
pub fn generate_random(n_points: usize, n_balls: usize, variant: Variant, seed: u64) -> Result<Instance> {
    if n_points == 0 || n_balls == 0 {
        return Err(Error::Generation("need at least one point and one ball".into()));
    }
    let side = (n_points as i64).max(3);
    for attempt in 0..RETRY_BUDGET {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(RETRY_BUDGET).wrapping_add(attempt));
        let mut seen = BTreeSet::new();
        let mut coords = Vec::with_capacity(n_points);
        while coords.len() < n_points {
            let c = (rng.random_range(0..side), rng.random_range(0..side));
            if seen.insert(c) {
                coords.push(c);
            }
        }
        let space = MetricSpace::from_grid(&coords);

        let centers: Vec<usize> = (0..n_balls).map(|_| rng.random_range(0..n_points)).collect();
        let mut radii: Vec<i64> = (0..n_balls).map(|_| rng.random_range(1..=side / 2 + 1)).collect();
        // Stretch the ball with the nearest center over each uncovered point.
        for p in 0..n_points {
            let covered = (0..n_balls).any(|b| *space.dist(centers[b], p) <= int(radii[b]));
            if !covered {
                let b = (0..n_balls).min_by(|&a, &b| space.dist(centers[a], p).cmp(space.dist(centers[b], p))).unwrap();
                let d = space.dist(centers[b], p).to_integer().try_into().unwrap_or(i64::MAX);
                radii[b] = d.max(1);
            }
        }
        let max_cap = n_points as u64;
        let capacities: Vec<u64> = match variant {
            Variant::Uniform => vec![rng.random_range(1..=max_cap); n_balls],
            Variant::Monotonic => {
                let distinct: BTreeSet<i64> = radii.iter().copied().collect();
                let mut caps: Vec<u64> = (0..distinct.len()).map(|_| rng.random_range(1..=max_cap)).collect();
                caps.sort_unstable();
                let by_radius: Vec<i64> = distinct.into_iter().collect();
                radii.iter().map(|r| caps[by_radius.binary_search(r).unwrap()]).collect()
            }
        };

        let balls: Vec<Ball> = (0..n_balls)
            .map(|id| Ball { id, center: centers[id], radius: int(radii[id]), capacity: capacities[id] })
            .collect();
        let Ok(instance) = Instance::new(space, balls, variant) else { continue };
        let all_open: Vec<(usize, Quadratic)> = (0..n_balls).map(|b| (b, Quadratic::from_int(1))).collect();
        if max_assignable(&instance, &all_open) == n_points {
            return Ok(instance);
        }
    }
    Err(Error::Generation(format!(
        "no feasible instance with {n_points} points and {n_balls} balls after {RETRY_BUDGET} attempts"
    )))
}

/// A family of sets over the universe `0..universe`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSystem {
    universe: usize,
    sets: Vec<Vec<usize>>,
}

impl SetSystem {
    pub fn new(universe: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut covered = vec![false; universe];
        for (k, set) in sets.iter().enumerate() {
            for &e in set {
                if e >= universe {
                    return Err(Error::Instance(format!("set {k} names element {e} outside the universe")));
                }
                covered[e] = true;
            }
        }
        if let Some(e) = covered.iter().position(|c| !c) {
            return Err(Error::Instance(format!("element {e} belongs to no set")));
        }
        let sets = sets.into_iter().map(|s| s.into_iter().collect::<BTreeSet<_>>().into_iter().collect()).collect();
        Ok(SetSystem { universe, sets })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Minimum number of sets covering the universe, by enumeration.
    pub fn min_cover_size(&self) -> Option<usize> {
        let s = self.sets.len();
        (1..=s).find(|&k| {
            subsets_of_size(s, k).any(|chosen| {
                let mut hit = vec![false; self.universe];
                for &c in &chosen {
                    for &e in &self.sets[c] {
                        hit[e] = true;
                    }
                }
                hit.into_iter().all(|h| h)
            })
        })
    }
}

/// Lexicographic k-subsets of `0..n`.
pub(crate) fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let next = {
            let mut c = out.clone();
            let mut i = k;
            loop {
                if i == 0 {
                    break None;
                }
                i -= 1;
                if c[i] < n - k + i {
                    c[i] += 1;
                    for j in i + 1..k {
                        c[j] = c[j - 1] + 1;
                    }
                    break Some(c);
                }
            }
        };
        current = next;
        Some(out)
    })
}

/// Reads a set system: an optional `universe N` line, then one set per line
/// as whitespace-separated element ids. Blank lines and `#` comments are
/// skipped. Without a `universe` line the universe is `0..=max id`.
pub fn parse_set_system(text: &str) -> Result<SetSystem> {
    let mut universe = None;
    let mut sets = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(n) = line.strip_prefix("universe") {
            universe = Some(n.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad universe size", no + 1)))?);
            continue;
        }
        let set = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("line {}: bad element `{t}`", no + 1))))
            .collect::<Result<Vec<_>>>()?;
        sets.push(set);
    }
    let universe = universe.unwrap_or_else(|| sets.iter().flatten().max().map_or(0, |m| m + 1));
    SetSystem::new(universe, sets)
}

/// Capacitated covering instance encoding a set system: one demand point per
/// element, one radius-1 ball per set whose center is at distance 1 from its
/// members. Distances elsewhere are the shortest-path completion over the
/// incidence graph, so a center is at distance ≥ 3 from every non-member.
pub fn from_set_cover(system: &SetSystem, capacity: u64) -> Result<Instance> {
    if capacity == 0 {
        return Err(Error::Instance("capacity must be at least 1".into()));
    }
    let n = system.universe();
    let s = system.sets().len();
    let edges: Vec<_> =
        system.sets().iter().enumerate().flat_map(|(k, set)| set.iter().map(move |&e| (n + k, e, int(1)))).collect();
    let space = MetricSpace::shortest_path_completion(n + s, &edges, &int(3));
    let balls = (0..s).map(|k| Ball { id: k, center: n + k, radius: int(1), capacity }).collect();
    Instance::with_demand(space, balls, Variant::Uniform, (0..n).collect())
}
