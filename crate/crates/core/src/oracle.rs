//! Exact and greedy baselines for small instances.

use crate::arith::{Quadratic, Rational};
use crate::assignment::{assign_integrally, max_assignable, IntegralAssignment};
use crate::batch::Execution;
use crate::error::{Error, Result};
use crate::instance::{subsets_of_size, Instance};

pub const DEFAULT_BUDGET: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub opt_size: usize,
    pub witness: IntegralAssignment,
    /// Subsets whose assignment network was solved, counted as a sequential
    /// scan would.
    pub subsets_tested: u64,
}

/// Smallest set of balls that serves every demand point within `beta` times
/// its radius, by enumeration in increasing size and then lexicographic
/// order.
pub fn optimal_cover(instance: &Instance, beta: &Rational, budget: usize, exec: Execution) -> Result<OracleResult> {
    let n = instance.balls().len();
    if n > budget {
        return Err(Error::BudgetExceeded { balls: n, budget });
    }
    let beta = Quadratic::from_rational(beta.clone());
    let need = instance.demand().len();
    if need == 0 {
        let witness = IntegralAssignment { open: Default::default(), assign: Default::default() };
        return Ok(OracleResult { opt_size: 0, witness, subsets_tested: 0 });
    }
    let max_cap = instance.balls().iter().map(|b| b.capacity).max().unwrap_or(0);
    let mut tested = 0u64;
    for k in 1..=n {
        if (k as u64).saturating_mul(max_cap) < need as u64 {
            continue;
        }
        let subsets: Vec<Vec<usize>> = subsets_of_size(n, k).collect();
        let open_of = |s: &[usize]| -> Vec<(usize, Quadratic)> { s.iter().map(|&b| (b, beta.clone())).collect() };
        let hit = exec.find_first(subsets.len(), |i| max_assignable(instance, &open_of(&subsets[i])) == need);
        match hit {
            Some(i) => {
                tested += i as u64 + 1;
                let witness = assign_integrally(instance, &open_of(&subsets[i]))
                    .map_err(|_| Error::Invariant("oracle witness lost its assignment".into()))?;
                return Ok(OracleResult { opt_size: k, witness, subsets_tested: tested });
            }
            None => tested += subsets.len() as u64,
        }
    }
    Err(Error::NoCover)
}

/// Capacitated greedy at expansion 1: repeatedly opens the ball that raises
/// the number of assignable points the most (ties to the lower id).
///
/// The number of assignable points is a max-flow value, which is submodular
/// in the open set, so this is the classical greedy for submodular cover.
pub fn greedy_cover(instance: &Instance) -> Result<IntegralAssignment> {
    let one = Quadratic::from_int(1);
    let need = instance.demand().len();
    let mut open: Vec<(usize, Quadratic)> = Vec::new();
    let mut served = 0;
    while served < need {
        let mut best: Option<(usize, usize)> = None;
        for ball in instance.balls() {
            if open.iter().any(|(b, _)| *b == ball.id) {
                continue;
            }
            open.push((ball.id, one.clone()));
            let value = max_assignable(instance, &open);
            open.pop();
            if value > served && best.is_none_or(|(_, v)| value > v) {
                best = Some((ball.id, value));
            }
        }
        let (b, value) = best.ok_or(Error::NoCover)?;
        open.push((b, one.clone()));
        served = value;
    }
    assign_integrally(instance, &open).map_err(|_| Error::NoCover)
}
