use num_traits::{Signed, Zero};

use crate::arith::{fmt_rational, Rational};
use crate::error::{Error, Result};
use crate::lp::FractionalSolution;

/// Moves `amount` of `point`'s flow from the `from` balls to `to`, draining
/// the sources in the order given. Returns how much each source gave up
/// (sources that gave nothing are omitted).
///
/// Fails without modifying `solution` if the sources together carry less
/// than `amount`.
pub fn reroute(
    solution: &mut FractionalSolution,
    point: usize,
    from: &[usize],
    to: usize,
    amount: &Rational,
) -> Result<Vec<(usize, Rational)>> {
    if amount.is_negative() {
        return Err(Error::Invariant(format!("negative reroute amount {}", fmt_rational(amount))));
    }
    let available: Rational = from.iter().filter(|&&b| b != to).map(|&b| solution.x(b, point)).sum();
    if available < *amount {
        return Err(Error::Invariant(format!(
            "reroute of {} for point {point} exceeds source flow {}",
            fmt_rational(amount),
            fmt_rational(&available)
        )));
    }
    let mut left = amount.clone();
    let mut taken = Vec::new();
    for &b in from {
        if left.is_zero() {
            break;
        }
        if b == to {
            continue;
        }
        let have = solution.x(b, point);
        if have.is_zero() {
            continue;
        }
        let take = if have <= left { have.clone() } else { left.clone() };
        solution.set_x(b, point, have - &take);
        left -= &take;
        taken.push((b, take));
    }
    let moved: Rational = taken.iter().map(|(_, v)| v).sum();
    let current = solution.x(to, point);
    solution.set_x(to, point, current + moved);
    Ok(taken)
}
