use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::arith::{fmt_rational, from_u64, rat, Rational};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::FractionalSolution;

use super::reroute::reroute;
use super::trace::TraceEvent;
use super::{PipelineConfig, ScaledCapacities};

/// Cluster formation over `σ̄`.
///
/// Flow held by a heavy ball is tracked by origin: the heavy ball itself or
/// the light ball it absorbed the flow from. Selection uses this to hand
/// absorbed flow back to selected light balls.
#[derive(Clone, Debug)]
pub struct ClusterState {
    pub lambda: BTreeSet<usize>,
    pub opened: Vec<usize>,
    pub clusters: BTreeMap<usize, Vec<usize>>,
    pub discarded: Vec<usize>,
    pub solution: FractionalSolution,
    pub events: Vec<TraceEvent>,
    heavy: BTreeSet<usize>,
    points: Vec<usize>,
    caps: ScaledCapacities,
    origins: BTreeMap<(usize, usize), BTreeMap<usize, Rational>>,
    ybar: BTreeMap<usize, Rational>,
    ytilde: BTreeMap<usize, Rational>,
    last_k: Option<Rational>,
    alpha: Rational,
    divisor: Rational,
}

impl ClusterState {
    pub fn new(
        sigma_bar: &FractionalSolution,
        heavy: &BTreeSet<usize>,
        light: &BTreeSet<usize>,
        p1: &[usize],
        caps: &ScaledCapacities,
        cfg: &PipelineConfig,
    ) -> Result<Self> {
        let mut origins = BTreeMap::new();
        for ((b, p), v) in sigma_bar.xs() {
            if heavy.contains(&b) {
                origins.insert((b, p), BTreeMap::from([(b, v.clone())]));
            }
        }
        let ybar: BTreeMap<usize, Rational> = light.iter().map(|&l| (l, sigma_bar.y(l))).collect();
        let mut state = ClusterState {
            lambda: light.clone(),
            opened: Vec::new(),
            clusters: heavy.iter().map(|&h| (h, Vec::new())).collect(),
            discarded: Vec::new(),
            solution: sigma_bar.clone(),
            events: Vec::new(),
            heavy: heavy.clone(),
            points: p1.to_vec(),
            caps: caps.clone(),
            origins,
            ybar,
            ytilde: heavy.iter().map(|&h| (h, Rational::zero())).collect(),
            last_k: None,
            alpha: cfg.alpha.clone(),
            divisor: cfg.divisor(),
        };
        for &h in heavy {
            state.events.push(TraceEvent::Heavy { id: h, ac: state.ac(h) });
        }
        for (&l, y) in &state.ybar {
            state.events.push(TraceEvent::Light { id: l, ybar: y.clone() });
        }
        if !state.points.is_empty() && heavy.is_empty() {
            return Err(Error::Invariant("points need heavy flow but no ball is heavy".into()));
        }
        state.check_running()?;
        Ok(state)
    }

    /// `AC(B) = U'_B − Σ_{P1} x̄_B·`.
    pub fn ac(&self, ball: usize) -> Rational {
        self.caps.get(ball) - self.solution.flow_out(ball)
    }

    /// `U'` of a ball taking part in cluster formation.
    pub fn capacity(&self, ball: usize) -> &Rational {
        self.caps.get(ball)
    }

    pub fn heavy(&self) -> &BTreeSet<usize> {
        &self.heavy
    }

    /// Remaining flow of `heavy` that was absorbed from `origin`, per point.
    pub fn origin_flow(&self, heavy: usize, origin: usize) -> BTreeMap<usize, Rational> {
        self.origins
            .range((heavy, 0)..=(heavy, usize::MAX))
            .filter_map(|((_, p), m)| m.get(&origin).map(|v| (*p, v.clone())))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    pub fn ytilde(&self, heavy: usize) -> &Rational {
        &self.ytilde[&heavy]
    }

    fn served(&self, ball: usize) -> Vec<usize> {
        self.solution.row(ball).map(|(p, _)| p).collect()
    }

    fn heavy_flow(&self, point: usize) -> Rational {
        self.heavy.iter().map(|&h| self.solution.x(h, point)).sum()
    }

    fn ytilde_bound(&self) -> Rational {
        Rational::one() + &self.divisor * &self.alpha
    }

    fn absorb(&mut self, heavy: usize, light: usize) -> Result<()> {
        let flow = self.solution.flow_out(light);
        for p in self.served(light) {
            let v = self.solution.x(light, p);
            reroute(&mut self.solution, p, &[light], heavy, &v)?;
            *self.origins.entry((heavy, p)).or_default().entry(light).or_insert_with(Rational::zero) += v;
        }
        self.lambda.remove(&light);
        self.clusters.get_mut(&heavy).expect("heavy ball has a cluster").push(light);
        let y = self.ybar[&light].clone();
        *self.ytilde.get_mut(&heavy).unwrap() -= y;
        self.events.push(TraceEvent::Absorb { heavy, light, flow });
        if let Some(k) = &self.last_k {
            self.check_credit(heavy, &k.clone())?;
        }
        Ok(())
    }

    /// Moves all of `point`'s flow from other balls still in Λ to `target`.
    fn drain_lambda(&mut self, point: usize, target: usize) -> Result<()> {
        let sources: Vec<usize> = self.lambda.iter().copied().filter(|&b| b != target).collect();
        let amount: Rational = sources.iter().map(|&b| self.solution.x(b, point)).sum();
        if amount > self.ac(target) {
            return Err(Error::Invariant(format!(
                "ball {target} lacks capacity for the unresolved light flow of point {point}"
            )));
        }
        reroute(&mut self.solution, point, &sources, target, &amount)?;
        Ok(())
    }

    /// Moves `amount` of `point`'s heavy flow to `target`, draining heavy
    /// balls ascending. Within a heavy ball its own flow goes first, then
    /// absorbed flow by ascending origin.
    fn drain_heavy(
        &mut self,
        point: usize,
        target: usize,
        amount: &Rational,
        taken: &mut BTreeMap<usize, Rational>,
    ) -> Result<()> {
        let sources: Vec<usize> = self.heavy.iter().copied().collect();
        for (h, v) in reroute(&mut self.solution, point, &sources, target, amount)? {
            let origins = self.origins.get_mut(&(h, point)).expect("heavy flow has an origin");
            let mut left = v.clone();
            let order: Vec<usize> = std::iter::once(h).chain(origins.keys().copied().filter(|&o| o != h)).collect();
            for o in order {
                if left.is_zero() {
                    break;
                }
                let Some(have) = origins.get_mut(&o) else { continue };
                let cut = if *have <= left { have.clone() } else { left.clone() };
                *have -= &cut;
                left -= cut;
            }
            origins.retain(|_, v| !v.is_zero());
            *taken.entry(h).or_insert_with(Rational::zero) += v;
        }
        Ok(())
    }

    /// Pulls a point entirely onto `target`: unresolved light flow first,
    /// then as much heavy flow as `target` can still hold.
    fn pull_point(&mut self, point: usize, target: usize, taken: &mut BTreeMap<usize, Rational>) -> Result<()> {
        self.drain_lambda(point, target)?;
        let amount = self.ac(target).min(self.heavy_flow(point));
        self.drain_heavy(point, target, &amount, taken)
    }

    fn open_next(&mut self) -> Result<()> {
        // k_j = min(U'_j, |A_j|); the largest k wins, ties to the lower id.
        let mut best: Option<(usize, Rational)> = None;
        for &l in &self.lambda {
            let k = self.caps.get(l).clone().min(from_u64(self.served(l).len() as u64));
            if best.as_ref().is_none_or(|(_, bk)| k > *bk) {
                best = Some((l, k));
            }
        }
        let (t, k) = best.expect("Λ is non-empty");
        self.lambda.remove(&t);
        let served = self.served(t);
        let mut taken = BTreeMap::new();
        let two = rat(2, 1);
        let case = if k > two {
            let count = ((Rational::one() - &self.divisor * &self.alpha) * &k).floor().to_integer();
            let count: usize = count.try_into().expect("point count fits in usize");
            for &p in served.iter().take(count) {
                self.pull_point(p, t, &mut taken)?;
            }
            1
        } else if k >= Rational::one() {
            if *self.caps.get(t) >= from_u64(served.len() as u64) {
                for &p in &served {
                    self.pull_point(p, t, &mut taken)?;
                }
            } else {
                let p = served[0];
                self.drain_lambda(p, t)?;
                let f = self.solution.x(t, p);
                if f > &self.alpha * rat(4, 1) {
                    return Err(Error::Invariant(format!(
                        "point {p} receives {} from ball {t}, more than 4α",
                        fmt_rational(&f)
                    )));
                }
                let amount = self.ac(t).min(Rational::one() - f).min(self.heavy_flow(p));
                self.drain_heavy(p, t, &amount, &mut taken)?;
            }
            2
        } else {
            let p = served[0];
            self.drain_lambda(p, t)?;
            let amount = self.ac(t).min(self.heavy_flow(p));
            self.drain_heavy(p, t, &amount, &mut taken)?;
            3
        };

        let f_total: Rational = taken.values().sum();
        if f_total < &k / rat(60, 1) {
            return Err(Error::Invariant(format!(
                "ball {t} opened with F = {} below k/60 = {}",
                fmt_rational(&f_total),
                fmt_rational(&(&k / rat(60, 1)))
            )));
        }
        for (h, f) in &taken {
            *self.ytilde.get_mut(h).unwrap() += f / &k;
        }
        self.opened.push(t);
        self.events.push(TraceEvent::Open {
            light: t,
            k: k.clone(),
            f: f_total,
            case,
            from: taken.into_iter().collect(),
        });
        for h in self.heavy.clone() {
            self.check_credit(h, &k)?;
        }
        self.last_k = Some(k);
        Ok(())
    }

    /// `ỹ(B) < 1 + 10α` and `AC(B) ≥ ỹ(B)·k`.
    fn check_credit(&self, heavy: usize, k: &Rational) -> Result<()> {
        let yt = &self.ytilde[&heavy];
        if *yt >= self.ytilde_bound() {
            return Err(Error::Invariant(format!("y-accumulation of ball {heavy} reached {}", fmt_rational(yt))));
        }
        if self.ac(heavy) < yt * k {
            return Err(Error::Invariant(format!(
                "ball {heavy} has available capacity {} below ỹ·k = {}",
                fmt_rational(&self.ac(heavy)),
                fmt_rational(&(yt * k))
            )));
        }
        Ok(())
    }

    /// Capacity, conservation and the heavy-flow floor for points still
    /// served by unresolved light balls.
    fn check_running(&self) -> Result<()> {
        for &b in self.heavy.iter().chain(&self.lambda).chain(&self.opened) {
            if self.ac(b).is_negative() {
                return Err(Error::Invariant(format!("ball {b} exceeds its scaled capacity")));
            }
        }
        let floor = Rational::one() - &self.alpha * rat(4, 1);
        for &p in &self.points {
            let total = self.solution.inflow(p);
            if !total.is_one() {
                return Err(Error::Invariant(format!("point {p} carries flow {}", fmt_rational(&total))));
            }
            let unresolved = self.lambda.iter().any(|&l| self.solution.x(l, p).is_positive());
            if unresolved && self.heavy_flow(p) < floor {
                return Err(Error::Invariant(format!("point {p} lost heavy flow while still served by Λ")));
            }
        }
        Ok(())
    }
}

/// Runs cluster formation to completion and checks the bound on `|O|`.
pub fn cluster_formation(mut state: ClusterState, instance: &Instance, cfg: &PipelineConfig) -> Result<ClusterState> {
    while !state.lambda.is_empty() {
        'absorb: loop {
            for h in state.heavy.clone() {
                for l in state.lambda.clone() {
                    if instance.intersects(h, l) && state.ac(h) >= state.solution.flow_out(l) {
                        state.absorb(h, l)?;
                        continue 'absorb;
                    }
                }
            }
            break;
        }
        state.check_running()?;
        for l in state.lambda.clone() {
            if state.solution.flow_out(l).is_zero() {
                state.lambda.remove(&l);
                state.discarded.push(l);
                state.events.push(TraceEvent::Discard { light: l });
            }
        }
        if state.lambda.is_empty() {
            break;
        }
        state.open_next()?;
        state.check_running()?;
    }

    for (&h, members) in &state.clusters {
        if state.solution.flow_out(h) > instance.ball(h).capacity_rational() {
            return Err(Error::Invariant(format!("cluster of ball {h} carries more than its capacity")));
        }
        debug_assert!(members.iter().all(|l| state.solution.flow_out(*l).is_zero()));
    }
    for t in state.opened.clone() {
        state.solution.set_y(t, Rational::one());
    }
    let absorbed: Vec<usize> = state.clusters.values().flatten().chain(&state.discarded).copied().collect();
    for l in absorbed {
        state.solution.set_y(l, Rational::zero());
    }

    let light_sum: Rational = state.ybar.values().sum();
    let h1 = from_u64(state.heavy.len() as u64);
    let o = from_u64(state.opened.len() as u64);
    let o_bound = rat(60, 1) * ((Rational::one() + cfg.divisor() * &cfg.alpha) * &h1 + &light_sum);
    if o > o_bound {
        return Err(Error::Invariant(format!("|O| = {o} exceeds {}", fmt_rational(&o_bound))));
    }
    Ok(state)
}
