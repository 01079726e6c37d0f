use num_traits::One;

use crate::arith::{fmt_rational, Quadratic};
use crate::error::{Error, Result};
use crate::instance::Instance;

use super::aux2::Aux2Rounding;
use super::{OpenBall, PipelineConfig, RoundedSolution};

/// Merges the two rounded halves. A light ball opened in both keeps the
/// larger expansion and the sum of both flows.
pub fn combine(
    part1: RoundedSolution,
    aux2: &Aux2Rounding,
    instance: &Instance,
    cfg: &PipelineConfig,
) -> Result<RoundedSolution> {
    let mut out = part1;
    let three = Quadratic::from_int(3);
    for &b in &aux2.o_prime {
        out.open_ball(b, OpenBall { expansion: three.clone(), cluster: None, from_o: false, from_o_prime: true });
    }
    for (&(b, p), v) in &aux2.flow {
        out.add_flow(b, p, v);
    }
    for ball in instance.balls() {
        let load = out.load(ball.id);
        if load > ball.capacity_rational() {
            return Err(Error::Invariant(format!(
                "ball {} carries {} after merging, above its capacity {}",
                ball.id,
                fmt_rational(&load),
                ball.capacity
            )));
        }
    }
    for &p in instance.demand() {
        let inflow = out.inflow(p);
        if !inflow.is_one() {
            return Err(Error::Invariant(format!("point {p} receives {} after merging", fmt_rational(&inflow))));
        }
    }
    let beta = super::variant_beta(instance.variant());
    if out.max_expansion() > beta {
        return Err(Error::Invariant(format!("an expansion exceeds {beta}")));
    }
    debug_assert!(cfg.validate().is_ok());
    Ok(out)
}
