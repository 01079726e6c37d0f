use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::arith::{rat, Rational};
use crate::instance::Instance;
use crate::lp::FractionalSolution;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thresholded {
    pub sigma: FractionalSolution,
    pub heavy: BTreeSet<usize>,
    pub light: BTreeSet<usize>,
}

/// Rounds every `y* > α` up to 1; smaller openings stay as they are.
pub fn threshold(sigma_star: &FractionalSolution, alpha: &Rational) -> Thresholded {
    let mut sigma = FractionalSolution::new();
    let mut heavy = BTreeSet::new();
    let mut light = BTreeSet::new();
    for (b, y) in sigma_star.ys() {
        if y > alpha {
            sigma.set_y(b, Rational::one());
            heavy.insert(b);
        } else {
            sigma.set_y(b, y.clone());
            if y.is_positive() {
                light.insert(b);
            }
        }
    }
    for ((b, p), v) in sigma_star.xs() {
        sigma.set_x(b, p, v.clone());
    }
    Thresholded { sigma, heavy, light }
}

/// Splits the demand points: `P1` gets at most `4α` from light balls.
pub fn partition_points(
    instance: &Instance,
    sigma: &FractionalSolution,
    light: &BTreeSet<usize>,
    alpha: &Rational,
) -> (Vec<usize>, Vec<usize>) {
    let limit = alpha * rat(4, 1);
    instance.demand().iter().partition(|&&p| {
        let from_light: Rational = light.iter().map(|&l| sigma.x(l, p)).sum();
        from_light <= limit
    })
}

/// `σ̄`: heavy openings kept, light openings scaled by the divisor, flow
/// restricted to `P1`.
pub fn build_aux1(
    sigma: &FractionalSolution,
    heavy: &BTreeSet<usize>,
    light: &BTreeSet<usize>,
    p1: &[usize],
    divisor: &Rational,
) -> FractionalSolution {
    let mut out = FractionalSolution::new();
    for &h in heavy {
        out.set_y(h, sigma.y(h));
    }
    for &l in light {
        out.set_y(l, sigma.y(l) * divisor);
    }
    let p1: BTreeSet<usize> = p1.iter().copied().collect();
    for ((b, p), v) in sigma.xs() {
        if p1.contains(&p) && (heavy.contains(&b) || light.contains(&b)) {
            out.set_x(b, p, v.clone());
        }
    }
    out
}

/// `σ̂` over the second light copy and `P2`, with demands `d_j` equal to the
/// light flow each point receives.
pub fn build_aux2(
    sigma: &FractionalSolution,
    light: &BTreeSet<usize>,
    p2: &[usize],
    divisor: &Rational,
) -> (FractionalSolution, BTreeMap<usize, Rational>) {
    let mut out = FractionalSolution::new();
    if p2.is_empty() {
        return (out, BTreeMap::new());
    }
    for &l in light {
        out.set_y(l, sigma.y(l) * divisor);
    }
    let mut demands = BTreeMap::new();
    for &p in p2 {
        let mut d = Rational::zero();
        for &l in light {
            let v = sigma.x(l, p);
            d += &v;
            out.set_x(l, p, v);
        }
        demands.insert(p, d);
    }
    (out, demands)
}

/// Doubles every `ŷ` and `x̂`, then trims points above 1 back to exactly 1 by
/// reducing their flows in ascending ball order.
pub fn double_and_cap(sigma_hat: &FractionalSolution) -> FractionalSolution {
    let two = rat(2, 1);
    let mut out = sigma_hat.scaled(&two);
    let points: BTreeSet<usize> = out.xs().map(|((_, p), _)| p).collect();
    for p in points {
        let mut excess = out.inflow(p) - Rational::one();
        if !excess.is_positive() {
            continue;
        }
        let serving: Vec<(usize, Rational)> =
            out.xs().filter(|((_, q), _)| *q == p).map(|((b, _), v)| (b, v.clone())).collect();
        for (b, v) in serving {
            if excess.is_zero() {
                break;
            }
            let cut = if v <= excess { v.clone() } else { excess.clone() };
            out.set_x(b, p, &v - &cut);
            excess -= cut;
        }
    }
    out
}
