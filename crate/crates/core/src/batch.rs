//! Data-parallel evaluation over many instances.
//!
//! With the `parallel` feature the work is spread over a rayon pool; without
//! it, or with [`Execution::Sequential`], items run in order on the calling
//! thread. Results always come back in input order.

use crate::arith::{fmt_rational, Quadratic, Rational};
use crate::assignment::integralize;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::oracle::{greedy_cover, optimal_cover};
use crate::rounding::{solve, variant_beta, PipelineConfig};
use crate::verify::{check_run, check_solution, record_opt, Candidate, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Applies `f` to every item, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// First index in `0..n` for which `pred` holds, as a sequential scan
    /// would find it.
    pub fn find_first<F>(self, n: usize, pred: F) -> Option<usize>
    where
        F: Fn(usize) -> bool + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().find_first(|&i| pred(i))
            }
            _ => (0..n).find(|&i| pred(i)),
        }
    }
}

/// Everything measured for one instance.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub lp_opt: Rational,
    pub pipeline_cost: usize,
    pub max_expansion: Quadratic,
    pub greedy_cost: usize,
    /// `None` when the instance is over the oracle budget.
    pub opt: Option<usize>,
    pub report: VerificationReport,
}

impl Evaluation {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// LP, pipeline, integralization, verification and both baselines.
pub fn evaluate(instance: &Instance, cfg: &PipelineConfig, budget: usize) -> Result<Evaluation> {
    let run = solve(instance, cfg)?;
    let beta = variant_beta(instance.variant());
    let mut report = check_run(instance, &run, cfg);
    report.extend(check_solution(instance, &Candidate::from(&run.rounded), &beta));
    let integral = integralize(instance, &run.rounded)?;
    report.extend(check_solution(instance, &Candidate::from(&integral), &beta));
    let greedy = greedy_cover(instance)?;
    let opt = match optimal_cover(instance, &Rational::from_integer(1.into()), budget, Execution::Sequential) {
        Ok(r) => Some(r.opt_size),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let lp_opt = run.sigma_star.cost().clone();
    if let Some(opt) = opt {
        record_opt(&mut report, run.rounded.cost(), opt);
        let o = Rational::from_integer(opt.into());
        report.record(
            "oracle-sandwich",
            lp_opt <= o && opt <= run.rounded.cost() && greedy.size() >= opt,
            format!("lp={} opt={opt} greedy={} pipeline={}", fmt_rational(&lp_opt), greedy.size(), run.rounded.cost()),
        );
    }
    Ok(Evaluation {
        lp_opt,
        pipeline_cost: run.rounded.cost(),
        max_expansion: run.rounded.max_expansion(),
        greedy_cost: greedy.size(),
        opt,
        report,
    })
}

/// [`evaluate`] over a batch, in input order.
pub fn evaluate_all(
    instances: &[Instance],
    cfg: &PipelineConfig,
    budget: usize,
    exec: Execution,
) -> Vec<Result<Evaluation>> {
    exec.map(instances, |inst| evaluate(inst, cfg, budget))
}
