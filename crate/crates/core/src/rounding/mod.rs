//! Rounding a fractional cover into one that opens whole balls.
//!
//! The pipeline thresholds the LP optimum into heavy and light balls, splits
//! the points by how much light flow they receive, and rounds the two halves
//! separately: points served mostly by heavy balls go through cluster
//! formation and per-cluster selection, the rest through a grouping pass over
//! the second copy of the light balls. The two halves are merged at the end.

mod aux2;
mod cluster;
mod combine;
mod prepare;
mod reroute;
mod select;
mod trace;

pub use aux2::{round_aux2, Aux2Rounding};
pub use cluster::{cluster_formation, ClusterState};
pub use combine::combine;
pub use prepare::{build_aux1, build_aux2, double_and_cap, partition_points, threshold, Thresholded};
pub use reroute::reroute;
pub use select::{select_balls, select_balls_monotonic, select_balls_uniform, Selection};
pub use trace::{parse_trace, SelectCase, Trace, TraceEvent, TRACE_HEADER};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{fmt_rational, from_u64, rat, Quadratic, Rational};
use crate::error::{Error, Result};
use crate::instance::{Instance, Variant};
use crate::lp::{
    build_aux_lp1, build_aux_lp2, build_mmcc_lp, check_lp_feasibility, solve_lp, BasisColumn, FractionalSolution,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub alpha: Rational,
    pub light_capacity_divisor: u64,
    pub top_k: usize,
    pub aux2_group_upper: Rational,
    pub aux2_scale: Rational,
    pub golden_c: Quadratic,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::with_alpha(rat(1, 60)).expect("default alpha is valid")
    }
}

impl PipelineConfig {
    /// Configuration with the derived constants `21α` and `1/(7α)`.
    pub fn with_alpha(alpha: Rational) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(Error::Instance(format!("alpha must lie in (0, 1/60], got {}", fmt_rational(&alpha))));
        }
        let cfg = PipelineConfig {
            aux2_group_upper: &alpha * rat(21, 1),
            aux2_scale: (&alpha * rat(7, 1)).recip(),
            alpha,
            light_capacity_divisor: 10,
            top_k: 10,
            golden_c: Quadratic::golden(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_positive() || self.alpha > rat(1, 60) {
            return Err(Error::Instance(format!("alpha must lie in (0, 1/60], got {}", fmt_rational(&self.alpha))));
        }
        if self.light_capacity_divisor == 0 || self.top_k as u64 != self.light_capacity_divisor {
            return Err(Error::Instance(format!(
                "top_k ({}) must equal the light capacity divisor ({})",
                self.top_k, self.light_capacity_divisor
            )));
        }
        Ok(())
    }

    pub fn divisor(&self) -> Rational {
        from_u64(self.light_capacity_divisor)
    }

    /// `(1 + 1/(7α))·U/10 < U`: a light ball opened in both halves stays
    /// within its original capacity.
    pub fn capacity_identity_holds(&self) -> bool {
        (Rational::one() + &self.aux2_scale) / self.divisor() < Rational::one()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CopyKind {
    H1,
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CopyTag {
    pub base: usize,
    pub copy: CopyKind,
}

impl fmt::Display for CopyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:?}", self.base, self.copy)
    }
}

/// `U'`: the original capacity for heavy balls, a tenth of it for light ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScaledCapacities {
    caps: BTreeMap<usize, Rational>,
}

impl ScaledCapacities {
    pub fn new(instance: &Instance, heavy: &BTreeSet<usize>, light: &BTreeSet<usize>, divisor: &Rational) -> Self {
        let mut caps = BTreeMap::new();
        for &h in heavy {
            caps.insert(h, instance.ball(h).capacity_rational());
        }
        for &l in light {
            caps.insert(l, instance.ball(l).capacity_rational() / divisor);
        }
        ScaledCapacities { caps }
    }

    pub fn get(&self, ball: usize) -> &Rational {
        &self.caps[&ball]
    }

    pub fn pairs<'a>(&self, balls: impl IntoIterator<Item = &'a usize>) -> Vec<(usize, Rational)> {
        balls.into_iter().map(|&b| (b, self.caps[&b].clone())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenBall {
    pub expansion: Quadratic,
    /// Heavy ball whose cluster selected this ball.
    pub cluster: Option<usize>,
    pub from_o: bool,
    pub from_o_prime: bool,
}

impl OpenBall {
    fn merge(&mut self, other: &OpenBall) {
        if other.expansion > self.expansion {
            self.expansion = other.expansion.clone();
        }
        self.cluster = self.cluster.or(other.cluster);
        self.from_o |= other.from_o;
        self.from_o_prime |= other.from_o_prime;
    }
}

/// Integral opening with a fractional assignment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundedSolution {
    pub open: BTreeMap<usize, OpenBall>,
    pub flow: BTreeMap<(usize, usize), Rational>,
}

impl RoundedSolution {
    pub fn cost(&self) -> usize {
        self.open.len()
    }

    pub fn load(&self, ball: usize) -> Rational {
        self.flow.range((ball, 0)..=(ball, usize::MAX)).map(|(_, v)| v).sum()
    }

    pub fn inflow(&self, point: usize) -> Rational {
        self.flow.iter().filter(|((_, p), _)| *p == point).map(|(_, v)| v).sum()
    }

    pub fn max_expansion(&self) -> Quadratic {
        self.open.values().map(|o| o.expansion.clone()).max().unwrap_or_else(|| Quadratic::from_int(0))
    }

    fn open_ball(&mut self, ball: usize, entry: OpenBall) {
        match self.open.get_mut(&ball) {
            Some(existing) => existing.merge(&entry),
            None => {
                self.open.insert(ball, entry);
            }
        }
    }

    fn add_flow(&mut self, ball: usize, point: usize, amount: &Rational) {
        if amount.is_zero() {
            return;
        }
        *self.flow.entry((ball, point)).or_insert_with(Rational::zero) += amount;
    }
}

/// Everything a pipeline run produced, kept for auditing.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub sigma_star: FractionalSolution,
    pub basis: Option<Vec<BasisColumn>>,
    pub heavy: BTreeSet<usize>,
    pub light: BTreeSet<usize>,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
    pub capacities: ScaledCapacities,
    pub sigma_bar: FractionalSolution,
    pub sigma_hat: FractionalSolution,
    pub demands: BTreeMap<usize, Rational>,
    pub opened: Vec<usize>,
    pub o_prime: BTreeSet<usize>,
    pub rounded: RoundedSolution,
    pub trace: Trace,
}

/// Solves the covering LP and rounds its optimum.
pub fn solve(instance: &Instance, cfg: &PipelineConfig) -> Result<PipelineRun> {
    let lp = solve_lp(&build_mmcc_lp(instance)?)?;
    let mut run = run_pipeline(instance, &lp.solution, cfg)?;
    run.trace.events.insert(0, TraceEvent::Basis(lp.basis.iter().map(|c| c.to_string()).collect()));
    run.basis = Some(lp.basis);
    Ok(run)
}

/// Rounds a feasible fractional solution `sigma_star` of the covering LP.
pub fn run_pipeline(instance: &Instance, sigma_star: &FractionalSolution, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let star_cost = sigma_star.cost().clone();
    let mut trace = Trace::default();
    trace.push(TraceEvent::SigmaStar { cost: star_cost.clone() });

    let Thresholded { sigma, heavy, light } = threshold(sigma_star, &cfg.alpha);
    let (p1, p2) = partition_points(instance, &sigma, &light, &cfg.alpha);
    let caps = ScaledCapacities::new(instance, &heavy, &light, &cfg.divisor());

    let sigma_bar = build_aux1(&sigma, &heavy, &light, &p1, &cfg.divisor());
    let (sigma_hat, demands) = build_aux2(&sigma, &light, &p2, &cfg.divisor());
    let aux1_balls: BTreeSet<usize> = heavy.union(&light).copied().collect();
    if !p1.is_empty() {
        let model = build_aux_lp1(instance, &caps.pairs(&aux1_balls), &p1)?;
        if let Some(v) = check_lp_feasibility(&sigma_bar, &model).first() {
            return Err(Error::Invariant(format!("first auxiliary solution infeasible: {v}")));
        }
    }
    if *sigma_bar.cost() > &star_cost / &cfg.alpha {
        return Err(Error::Invariant("first auxiliary solution costs more than cost(σ*)/α".into()));
    }
    if !p2.is_empty() {
        let model = build_aux_lp2(instance, &caps.pairs(&light), &demands)?;
        if let Some(v) = check_lp_feasibility(&sigma_hat, &model).first() {
            return Err(Error::Invariant(format!("second auxiliary solution infeasible: {v}")));
        }
    }
    if *sigma_hat.cost() > &star_cost * cfg.divisor() {
        return Err(Error::Invariant("second auxiliary solution costs more than 10·cost(σ*)".into()));
    }
    for &p in &p2 {
        let dropped: Rational = heavy.iter().map(|&h| sigma.x(h, p)).sum();
        if dropped.is_positive() {
            trace.push(TraceEvent::Drop { point: p, flow: dropped });
        }
    }

    let state = ClusterState::new(&sigma_bar, &heavy, &light, &p1, &caps, cfg)?;
    let state = cluster_formation(state, instance, cfg)?;
    let selection = select_balls(&state, instance, cfg)?;
    let opened = state.opened.clone();
    trace.events.extend(state.events);
    trace.events.extend(selection.events);

    let hat2 = double_and_cap(&sigma_hat);
    let aux2 = round_aux2(&hat2, instance, &p2, &caps, cfg)?;
    trace.events.extend(aux2.events.iter().cloned());

    let rounded = combine(selection.solution, &aux2, instance, cfg)?;
    let bound = &star_cost * rat(6000, 1);
    if from_u64(rounded.cost() as u64) > bound {
        return Err(Error::Invariant(format!(
            "rounded cost {} exceeds 6000·cost(σ*) = {}",
            rounded.cost(),
            fmt_rational(&bound)
        )));
    }
    trace.push(TraceEvent::Final { cost: rounded.cost() });

    Ok(PipelineRun {
        sigma_star: sigma_star.clone(),
        basis: None,
        heavy,
        light,
        p1,
        p2,
        capacities: caps,
        sigma_bar,
        sigma_hat,
        demands,
        opened,
        o_prime: aux2.o_prime,
        rounded,
        trace,
    })
}

/// The expansion bound each variant is proven to respect.
pub fn variant_beta(variant: Variant) -> Quadratic {
    match variant {
        Variant::Monotonic => Quadratic::from_int(5),
        Variant::Uniform => Quadratic::two_plus_sqrt5(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::instance::fixtures::{line3, single};

    #[test]
    fn config_defaults() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.alpha, rat(1, 60));
        assert_eq!(cfg.aux2_group_upper, rat(21, 60));
        assert_eq!(cfg.aux2_scale, rat(60, 7));
        assert!(cfg.capacity_identity_holds());
    }

    #[test]
    fn config_rejects_large_alpha_and_mismatched_top_k() {
        assert!(PipelineConfig::with_alpha(rat(1, 59)).is_err());
        assert!(PipelineConfig::with_alpha(int(0)).is_err());
        let mut cfg = PipelineConfig::default();
        cfg.top_k = 9;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn capacity_identity_needs_alpha_above_one_in_63() {
        assert!(PipelineConfig::with_alpha(rat(1, 62)).unwrap().capacity_identity_holds());
        assert!(!PipelineConfig::with_alpha(rat(1, 63)).unwrap().capacity_identity_holds());
    }

    #[test]
    fn single_ball_pipeline() {
        let run = solve(&single(), &PipelineConfig::default()).unwrap();
        assert_eq!(run.rounded.cost(), 1);
        assert_eq!(run.rounded.inflow(0), int(1));
    }

    #[test]
    fn line3_pipeline_opens_both() {
        for variant in [Variant::Monotonic, Variant::Uniform] {
            let run = solve(&line3(variant), &PipelineConfig::default()).unwrap();
            assert_eq!(run.rounded.open.keys().copied().collect::<Vec<_>>(), vec![0, 1]);
            assert!(run.rounded.max_expansion() <= variant_beta(variant));
            for p in 0..3 {
                assert_eq!(run.rounded.inflow(p), int(1));
            }
        }
    }

    #[test]
    fn pipeline_is_deterministic() {
        let inst = crate::instance::generate_random(8, 6, Variant::Monotonic, 11).unwrap();
        let a = solve(&inst, &PipelineConfig::default()).unwrap();
        let b = solve(&inst, &PipelineConfig::default()).unwrap();
        assert_eq!(a.rounded, b.rounded);
        assert_eq!(a.trace, b.trace);
    }
}
