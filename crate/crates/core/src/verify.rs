//! Independent checks of solutions, traces and pipeline runs.
//!
//! Nothing here trusts the pipeline's own bookkeeping: flows and loads are
//! recomputed from the candidate, and the cluster-formation quantities are
//! replayed from the trace events alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use num_traits::{One, Signed, Zero};

use crate::arith::{fmt_rational, from_u64, rat, Quadratic, Rational};
use crate::assignment::IntegralAssignment;
use crate::instance::Instance;
use crate::lp::{build_aux_lp1, build_aux_lp2, build_mmcc_lp, check_lp_feasibility};
use crate::rounding::{PipelineConfig, PipelineRun, RoundedSolution, Trace, TraceEvent};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured values on success, the offending ids and values on failure.
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub measures: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn record(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn measure(&mut self, name: &str, value: impl fmt::Display) {
        self.measures.push((name.to_string(), value.to_string()));
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.measures.extend(other.measures);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn get_measure(&self, name: &str) -> Option<&str> {
        self.measures.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

/// ```text
/// [check flow]
/// status = pass
/// detail = 6 points
///
/// [measures]
/// cost = 3
/// ```
impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[check {}]", c.name)?;
            writeln!(f, "status = {}", if c.passed { "pass" } else { "fail" })?;
            writeln!(f, "detail = {}", c.detail)?;
            writeln!(f)?;
        }
        writeln!(f, "[measures]")?;
        for (k, v) in &self.measures {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// A solution to be checked: open balls with their declared expansion and a
/// point-to-ball flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub open: BTreeMap<usize, Quadratic>,
    pub flow: BTreeMap<(usize, usize), Rational>,
    pub integral: bool,
}

impl From<&RoundedSolution> for Candidate {
    fn from(r: &RoundedSolution) -> Self {
        Candidate {
            open: r.open.iter().map(|(b, o)| (*b, o.expansion.clone())).collect(),
            flow: r.flow.clone(),
            integral: false,
        }
    }
}

impl From<&IntegralAssignment> for Candidate {
    fn from(a: &IntegralAssignment) -> Self {
        Candidate {
            open: a.open.clone(),
            flow: a.assign.iter().map(|(&p, &b)| ((b, p), Rational::one())).collect(),
            integral: true,
        }
    }
}

/// Flow 1 per demand point, load within capacity, every positive pair within
/// `beta_limit` times the ball's radius, and 0/1 flow in integral mode.
pub fn check_solution(instance: &Instance, candidate: &Candidate, beta_limit: &Quadratic) -> VerificationReport {
    let mode = if candidate.integral { "integral" } else { "fractional" };
    let name = |check: &str| format!("{mode}.{check}");
    let mut report = VerificationReport::default();
    let n_balls = instance.balls().len();
    let n_points = instance.space().len();

    let unknown: Vec<String> = candidate
        .flow
        .keys()
        .filter(|(b, p)| *b >= n_balls || *p >= n_points)
        .map(|(b, p)| format!("({b},{p})"))
        .chain(candidate.open.keys().filter(|&&b| b >= n_balls).map(|b| format!("ball {b}")))
        .collect();
    report.record(
        &name("references"),
        unknown.is_empty(),
        if unknown.is_empty() { "ok".into() } else { unknown.join(" ") },
    );
    if !unknown.is_empty() {
        return report;
    }

    let mut inflow: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut load: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut negative = Vec::new();
    for (&(b, p), v) in &candidate.flow {
        if v.is_negative() {
            negative.push(format!("x[{b},{p}]={}", fmt_rational(v)));
        }
        *inflow.entry(p).or_insert_with(Rational::zero) += v;
        *load.entry(b).or_insert_with(Rational::zero) += v;
    }
    report.record(&name("non-negative"), negative.is_empty(), negative.join(" "));

    let demand: BTreeSet<usize> = instance.demand().iter().copied().collect();
    let mut bad_flow = Vec::new();
    for &p in &demand {
        let v = inflow.get(&p).cloned().unwrap_or_else(Rational::zero);
        if !v.is_one() {
            bad_flow.push(format!("point {p} receives {}", fmt_rational(&v)));
        }
    }
    for (p, v) in &inflow {
        if !demand.contains(p) && !v.is_zero() {
            bad_flow.push(format!("non-demand point {p} receives {}", fmt_rational(v)));
        }
    }
    let detail = if bad_flow.is_empty() { format!("{} points", demand.len()) } else { bad_flow.join("; ") };
    report.record(&name("flow"), bad_flow.is_empty(), detail);

    let mut over = Vec::new();
    for (b, v) in &load {
        let cap = instance.ball(*b).capacity_rational();
        if *v > cap {
            over.push(format!("ball {b} load {} > {}", fmt_rational(v), fmt_rational(&cap)));
        }
    }
    report.record(&name("capacity"), over.is_empty(), over.join("; "));

    let mut closed = Vec::new();
    let mut outside = Vec::new();
    let mut declared = Vec::new();
    for (&(b, p), v) in &candidate.flow {
        if v.is_zero() {
            continue;
        }
        if !candidate.open.contains_key(&b) {
            closed.push(format!("x[{b},{p}]"));
        }
        if !instance.contains_expanded(b, p, beta_limit) {
            outside.push(format!(
                "ball {b} serves point {p} at distance {} > ({beta_limit})·{}",
                fmt_rational(instance.dist_to(b, p)),
                fmt_rational(&instance.ball(b).radius)
            ));
        }
        if let Some(e) = candidate.open.get(&b) {
            if !instance.contains_expanded(b, p, e) {
                declared.push(format!("ball {b} serves point {p} beyond its declared expansion {e}"));
            }
        }
    }
    report.record(&name("open"), closed.is_empty(), closed.join(" "));
    report.record(
        &name("coverage"),
        outside.is_empty(),
        if outside.is_empty() { format!("beta {beta_limit}") } else { outside.join("; ") },
    );
    report.record(&name("declared-expansion"), declared.is_empty(), declared.join("; "));

    if candidate.integral {
        let fractional: Vec<String> = candidate
            .flow
            .iter()
            .filter(|(_, v)| !v.is_zero() && !v.is_one())
            .map(|((b, p), v)| format!("x[{b},{p}]={}", fmt_rational(v)))
            .collect();
        report.record(&name("integral"), fractional.is_empty(), fractional.join(" "));
    }

    let ratio = realized_ratio(instance, candidate);
    report.measure(&name("cost"), candidate.open.len());
    report.measure(
        &name("max-declared-expansion"),
        candidate.open.values().max().cloned().unwrap_or_else(|| Quadratic::from_int(0)),
    );
    report.measure(&name("max-realized-ratio"), fmt_rational(&ratio));
    report
}

/// Largest `d(c_i, p_j) / r_i` over pairs carrying flow.
pub fn realized_ratio(instance: &Instance, candidate: &Candidate) -> Rational {
    candidate
        .flow
        .iter()
        .filter(|(_, v)| v.is_positive())
        .map(|((b, p), _)| instance.dist_to(*b, *p) / &instance.ball(*b).radius)
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Replays cluster formation from the trace and checks the five bounds:
/// `F ≥ k/60`, `ỹ < 1+10α`, `AC ≥ ỹ·k` after every step, the bound on `|O|`,
/// the selection cost bound and the final cost bound.
pub fn check_trace(trace: &Trace, cfg: &PipelineConfig, sigma_star_cost: &Rational) -> VerificationReport {
    let mut report = VerificationReport::default();
    let alpha = &cfg.alpha;
    let ten_alpha = cfg.divisor() * alpha;
    let y_bound = Rational::one() + &ten_alpha;
    let sixtieth = rat(1, 60);

    let mut ac: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut ytilde: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut ybar: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut last_k: Option<Rational> = None;
    let mut opened = 0usize;
    let mut selected: BTreeSet<usize> = BTreeSet::new();
    let mut final_cost = None;
    let mut traced_cost = None;

    let mut f_fail = Vec::new();
    let mut f_sum_fail = Vec::new();
    let mut y_fail = Vec::new();
    let mut ac_fail = Vec::new();
    let mut structure = Vec::new();
    let mut f_count = 0usize;

    let credit = |ac: &BTreeMap<usize, Rational>,
                  ytilde: &BTreeMap<usize, Rational>,
                  k: &Rational,
                  at: usize,
                  y_fail: &mut Vec<String>,
                  ac_fail: &mut Vec<String>| {
        for (h, yt) in ytilde {
            if *yt >= y_bound {
                y_fail.push(format!("event {at}: ỹ({h}) = {}", fmt_rational(yt)));
            }
            if ac[h] < yt * k {
                ac_fail.push(format!(
                    "event {at}: AC({h}) = {} < ỹ·k = {}",
                    fmt_rational(&ac[h]),
                    fmt_rational(&(yt * k))
                ));
            }
        }
    };

    for (at, event) in trace.events.iter().enumerate() {
        let at = at + 1;
        match event {
            TraceEvent::SigmaStar { cost } => traced_cost = Some(cost.clone()),
            TraceEvent::Heavy { id, ac: v } => {
                ac.insert(*id, v.clone());
                ytilde.insert(*id, Rational::zero());
            }
            TraceEvent::Light { id, ybar: v } => {
                ybar.insert(*id, v.clone());
            }
            TraceEvent::Absorb { heavy, light, flow } => {
                let (Some(a), Some(y)) = (ac.get_mut(heavy), ybar.get(light)) else {
                    structure.push(format!("event {at}: absorb names unknown balls"));
                    continue;
                };
                *a -= flow;
                if a.is_negative() {
                    ac_fail.push(format!("event {at}: AC({heavy}) = {} after absorb", fmt_rational(a)));
                }
                *ytilde.get_mut(heavy).unwrap() -= y;
                if let Some(k) = &last_k {
                    credit(&ac, &ytilde, k, at, &mut y_fail, &mut ac_fail);
                }
            }
            TraceEvent::Open { light, k, f, from, .. } => {
                f_count += 1;
                opened += 1;
                if *f < k * &sixtieth {
                    f_fail.push(format!(
                        "event {at}: ball {light} F = {} < k/60 = {}",
                        fmt_rational(f),
                        fmt_rational(&(k * &sixtieth))
                    ));
                }
                let sum: Rational = from.iter().map(|(_, v)| v).sum();
                if sum != *f {
                    f_sum_fail.push(format!(
                        "event {at}: F = {} but sources sum to {}",
                        fmt_rational(f),
                        fmt_rational(&sum)
                    ));
                }
                if !k.is_positive() {
                    structure.push(format!("event {at}: k = {}", fmt_rational(k)));
                    continue;
                }
                for (h, v) in from {
                    let (Some(a), Some(yt)) = (ac.get_mut(h), ytilde.get_mut(h)) else {
                        structure.push(format!("event {at}: flow taken from unknown heavy ball {h}"));
                        continue;
                    };
                    *a += v;
                    *yt += v / k;
                }
                credit(&ac, &ytilde, k, at, &mut y_fail, &mut ac_fail);
                last_k = Some(k.clone());
            }
            TraceEvent::Select { balls, factors, .. } => {
                if balls.len() != factors.len() || balls.len() > cfg.top_k {
                    structure.push(format!(
                        "event {at}: select lists {} balls, {} factors",
                        balls.len(),
                        factors.len()
                    ));
                }
                selected.extend(balls.iter().copied());
            }
            TraceEvent::Final { cost } => final_cost = Some(*cost),
            TraceEvent::Basis(_) | TraceEvent::Discard { .. } | TraceEvent::Drop { .. } | TraceEvent::Aux2 { .. } => {}
        }
    }

    if let Some(c) = &traced_cost {
        if c != sigma_star_cost {
            structure.push(format!(
                "trace records cost(σ*) = {}, expected {}",
                fmt_rational(c),
                fmt_rational(sigma_star_cost)
            ));
        }
    }
    report.record("trace.structure", structure.is_empty(), structure.join("; "));
    report.record(
        "trace.f-lower-bound",
        f_fail.is_empty(),
        if f_fail.is_empty() { format!("{f_count} opens") } else { f_fail.join("; ") },
    );
    report.record("trace.f-sum", f_sum_fail.is_empty(), f_sum_fail.join("; "));
    report.record("trace.ytilde-bound", y_fail.is_empty(), y_fail.join("; "));
    report.record("trace.ac-credit", ac_fail.is_empty(), ac_fail.join("; "));

    let h1 = from_u64(ac.len() as u64);
    let light_sum: Rational = ybar.values().sum();
    let o = from_u64(opened as u64);
    let o_bound = rat(60, 1) * ((Rational::one() + &ten_alpha) * &h1 + &light_sum);
    report.record("trace.o-bound", o <= o_bound, format!("|O| = {opened}, bound {}", fmt_rational(&o_bound)));

    let selection_cost = cfg.divisor() * &h1 + &o;
    let selection_bound = (rat(70, 1) + rat(600, 1) * alpha) * sigma_star_cost / alpha;
    let realized = from_u64((selected.len() + opened) as u64);
    report.record(
        "trace.selection-cost",
        realized <= selection_cost && selection_cost <= selection_bound,
        format!(
            "selected {} ≤ 10|H1|+|O| = {} ≤ {}",
            fmt_rational(&realized),
            fmt_rational(&selection_cost),
            fmt_rational(&selection_bound)
        ),
    );

    let final_bound = rat(6000, 1) * sigma_star_cost;
    match final_cost {
        Some(c) => report.record(
            "trace.final-cost",
            from_u64(c as u64) <= final_bound,
            format!("{c} ≤ {}", fmt_rational(&final_bound)),
        ),
        None => report.record("trace.final-cost", true, "no final event"),
    }
    report
}

/// Run-level checks: the LP optimum and both auxiliary solutions are
/// feasible with their cost bounds, the two halves compose within the
/// original capacities, and the trace replays cleanly.
pub fn check_run(instance: &Instance, run: &PipelineRun, cfg: &PipelineConfig) -> VerificationReport {
    let mut report = VerificationReport::default();
    let star_cost = run.sigma_star.cost().clone();

    let lp_violations = match build_mmcc_lp(instance) {
        Ok(model) => check_lp_feasibility(&run.sigma_star, &model).iter().map(|v| v.to_string()).collect(),
        Err(e) => vec![e.to_string()],
    };
    report.record("run.lp-feasible", lp_violations.is_empty(), lp_violations.join("; "));

    let aux1_balls: BTreeSet<usize> = run.heavy.union(&run.light).copied().collect();
    let bar_violations: Vec<String> = if run.p1.is_empty() {
        Vec::new()
    } else {
        match build_aux_lp1(instance, &run.capacities.pairs(&aux1_balls), &run.p1) {
            Ok(model) => check_lp_feasibility(&run.sigma_bar, &model).iter().map(|v| v.to_string()).collect(),
            Err(e) => vec![e.to_string()],
        }
    };
    report.record("run.aux1-feasible", bar_violations.is_empty(), bar_violations.join("; "));
    let bar_bound = &star_cost / &cfg.alpha;
    report.record(
        "run.aux1-cost",
        *run.sigma_bar.cost() <= bar_bound,
        format!("{} ≤ {}", fmt_rational(run.sigma_bar.cost()), fmt_rational(&bar_bound)),
    );

    let hat_violations: Vec<String> = if run.p2.is_empty() {
        Vec::new()
    } else {
        match build_aux_lp2(instance, &run.capacities.pairs(&run.light), &run.demands) {
            Ok(model) => check_lp_feasibility(&run.sigma_hat, &model).iter().map(|v| v.to_string()).collect(),
            Err(e) => vec![e.to_string()],
        }
    };
    report.record("run.aux2-feasible", hat_violations.is_empty(), hat_violations.join("; "));
    let hat_bound = &star_cost * cfg.divisor();
    report.record(
        "run.aux2-cost",
        *run.sigma_hat.cost() <= hat_bound,
        format!("{} ≤ {}", fmt_rational(run.sigma_hat.cost()), fmt_rational(&hat_bound)),
    );

    let both: Vec<usize> = run.opened.iter().copied().filter(|b| run.o_prime.contains(b)).collect();
    let mut over = Vec::new();
    for &b in &both {
        let load = run.rounded.load(b);
        let cap = instance.ball(b).capacity_rational();
        if load > cap {
            over.push(format!("ball {b} load {} > {}", fmt_rational(&load), fmt_rational(&cap)));
        }
    }
    let detail = if over.is_empty() { format!("{} balls in both halves", both.len()) } else { over.join("; ") };
    report.record("run.capacity-composition", over.is_empty(), detail);
    let factor = (Rational::one() + &cfg.aux2_scale) / cfg.divisor();
    report.record(
        "run.capacity-identity",
        cfg.capacity_identity_holds(),
        format!("(1 + 1/(7α))/10 = {}", fmt_rational(&factor)),
    );

    report.extend(check_trace(&run.trace, cfg, &star_cost));
    report.measure("lp-opt", fmt_rational(&star_cost));
    report.measure("heavy", run.heavy.len());
    report.measure("light", run.light.len());
    report.measure("opened", run.opened.len());
    report.measure("opened-second-half", run.o_prime.len());
    report.measure("cost", run.rounded.cost());
    report.measure("max-expansion", run.rounded.max_expansion());
    if star_cost.is_positive() {
        report.measure("cost-over-lp", fmt_rational(&(from_u64(run.rounded.cost() as u64) / &star_cost)));
    }
    report
}

/// Appends a `cost/OPT` measure.
pub fn record_opt(report: &mut VerificationReport, cost: usize, opt: usize) {
    let mut s = String::new();
    if opt == 0 {
        s.push('-');
    } else {
        write!(s, "{}", fmt_rational(&(from_u64(cost as u64) / from_u64(opt as u64)))).unwrap();
    }
    report.measure("cost-over-opt", s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::assignment::integralize;
    use crate::instance::fixtures::line3;
    use crate::instance::Variant;
    use crate::oracle::{optimal_cover, DEFAULT_BUDGET};
    use crate::rounding::{solve, variant_beta, SelectCase};

    #[test]
    fn oracle_witness_passes_at_one() {
        let inst = line3(Variant::Monotonic);
        let r = optimal_cover(&inst, &int(1), DEFAULT_BUDGET, crate::batch::Execution::Sequential).unwrap();
        let report = check_solution(&inst, &Candidate::from(&r.witness), &Quadratic::from_int(1));
        assert!(report.passed(), "{report}");
        assert_eq!(report.get_measure("integral.cost"), Some("2"));
    }

    #[test]
    fn failures_carry_witnesses() {
        let inst = line3(Variant::Monotonic);
        let mut c = Candidate { open: BTreeMap::new(), flow: BTreeMap::new(), integral: true };
        c.open.insert(0, Quadratic::from_int(1));
        c.flow.insert((0, 0), int(1));
        c.flow.insert((0, 1), int(1));
        c.flow.insert((0, 2), int(1));
        let report = check_solution(&inst, &c, &Quadratic::from_int(1));
        assert!(!report.passed());
        let cap = report.check("integral.capacity").unwrap();
        assert!(!cap.passed && cap.detail.contains("ball 0 load 3/1 > 2/1"));
        let cov = report.check("integral.coverage").unwrap();
        assert!(!cov.passed && cov.detail.contains("point 2"));
        // Passing at a larger expansion.
        let report = check_solution(&inst, &c, &Quadratic::from_int(2));
        assert!(report.check("integral.coverage").unwrap().passed);
    }

    #[test]
    fn pipeline_runs_pass_everything() {
        for variant in [Variant::Monotonic, Variant::Uniform] {
            let inst = line3(variant);
            let cfg = PipelineConfig::default();
            let run = solve(&inst, &cfg).unwrap();
            let mut report = check_run(&inst, &run, &cfg);
            report.extend(check_solution(&inst, &Candidate::from(&run.rounded), &variant_beta(variant)));
            let integral = integralize(&inst, &run.rounded).unwrap();
            report.extend(check_solution(&inst, &Candidate::from(&integral), &variant_beta(variant)));
            assert!(report.passed(), "{report}");
        }
    }

    #[test]
    fn empty_trace_is_vacuous() {
        let report = check_trace(&Trace::default(), &PipelineConfig::default(), &int(1));
        assert!(report.passed(), "{report}");
    }

    fn open_trace(f: Rational) -> Trace {
        let mut t = Trace::default();
        t.push(TraceEvent::SigmaStar { cost: int(2) });
        t.push(TraceEvent::Heavy { id: 0, ac: rat(1, 60) });
        t.push(TraceEvent::Light { id: 1, ybar: rat(1, 6) });
        t.push(TraceEvent::Open { light: 1, k: int(1), f: f.clone(), case: 2, from: vec![(0, f)] });
        t.push(TraceEvent::Select {
            cluster: 0,
            case: SelectCase::TopRanked,
            balls: vec![0],
            factors: vec![Quadratic::from_int(3)],
        });
        t.push(TraceEvent::Final { cost: 2 });
        t
    }

    #[test]
    fn halved_f_is_caught() {
        let cfg = PipelineConfig::default();
        let ok = check_trace(&open_trace(rat(1, 60)), &cfg, &int(2));
        assert!(ok.passed(), "{ok}");
        let bad = check_trace(&open_trace(rat(1, 120)), &cfg, &int(2));
        let c = bad.check("trace.f-lower-bound").unwrap();
        assert!(!c.passed);
        assert!(c.detail.starts_with("event 4: ball 1"));
    }

    #[test]
    fn report_text_is_stable() {
        let mut r = VerificationReport::default();
        r.record("a", true, "x");
        r.record("b", false, "ball 3");
        r.measure("cost", 4);
        assert_eq!(
            r.to_string(),
            "[check a]\nstatus = pass\ndetail = x\n\n[check b]\nstatus = fail\ndetail = ball 3\n\n[measures]\ncost = 4\n"
        );
    }
}
