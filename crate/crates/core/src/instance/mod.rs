//! Metric spaces, balls and covering instances.
//!
//! A [`MetricSpace`] holds every site (ball centers included). The sites that
//! must be covered form the instance's *demand*; by default that is every
//! site, but reductions such as [`from_set_cover`] place centers at sites
//! that need no coverage.

mod format;
mod generate;
mod metric;

pub use format::{parse_instance, write_instance, INSTANCE_HEADER};
pub(crate) use generate::subsets_of_size;
pub use generate::{from_set_cover, generate_random, parse_set_system, SetSystem};
pub use metric::{line_metric, validate_metric, MetricSpace, MetricViolation};

use std::fmt;

use num_traits::{One, Signed};

use crate::arith::{from_u64, Quadratic, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// All balls share one capacity (MCC).
    Uniform,
    /// Capacities are non-decreasing in radius (MMCC).
    Monotonic,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Uniform => "uniform",
            Variant::Monotonic => "monotonic",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Variant::Uniform),
            "monotonic" => Ok(Variant::Monotonic),
            other => Err(Error::Parse(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub id: usize,
    pub center: usize,
    pub radius: Rational,
    pub capacity: u64,
}

impl Ball {
    pub fn capacity_rational(&self) -> Rational {
        from_u64(self.capacity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    space: MetricSpace,
    balls: Vec<Ball>,
    variant: Variant,
    demand: Vec<usize>,
}

impl Instance {
    /// Instance where every site of the metric space must be covered.
    pub fn new(space: MetricSpace, balls: Vec<Ball>, variant: Variant) -> Result<Self> {
        let demand = (0..space.len()).collect();
        Instance::with_demand(space, balls, variant, demand)
    }

    pub fn with_demand(space: MetricSpace, balls: Vec<Ball>, variant: Variant, demand: Vec<usize>) -> Result<Self> {
        validate_metric(space.rows()).map_err(Error::Metric)?;
        let n = space.len();
        for (idx, ball) in balls.iter().enumerate() {
            if ball.id != idx {
                return Err(Error::Instance(format!("ball at position {idx} has id {}", ball.id)));
            }
            if ball.center >= n {
                return Err(Error::Instance(format!("ball {idx} has center {} outside the space", ball.center)));
            }
            if !ball.radius.is_positive() {
                return Err(Error::Instance(format!("ball {idx} has non-positive radius")));
            }
            if ball.capacity < 1 {
                return Err(Error::Instance(format!("ball {idx} has capacity 0")));
            }
        }
        match variant {
            Variant::Uniform => {
                if let Some(b) = balls.iter().find(|b| b.capacity != balls[0].capacity) {
                    return Err(Error::Instance(format!(
                        "uniform instance has capacities {} and {} (ball {})",
                        balls[0].capacity, b.capacity, b.id
                    )));
                }
            }
            Variant::Monotonic => {
                for a in &balls {
                    for b in &balls {
                        if a.radius >= b.radius && a.capacity < b.capacity {
                            return Err(Error::Instance(format!(
                                "capacities not monotonic: ball {} has radius ≥ ball {} but smaller capacity",
                                a.id, b.id
                            )));
                        }
                    }
                }
            }
        }
        if demand.windows(2).any(|w| w[0] >= w[1]) || demand.last().is_some_and(|&p| p >= n) {
            return Err(Error::Instance("demand must be strictly increasing site indices".into()));
        }
        let instance = Instance { space, balls, variant, demand };
        for &p in &instance.demand {
            if !instance.balls.iter().any(|b| instance.contains(b.id, p, &Rational::one())) {
                return Err(Error::UncoveredPoint { point: p });
            }
        }
        Ok(instance)
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn ball(&self, id: usize) -> &Ball {
        &self.balls[id]
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Sites that must be assigned to a ball, ascending.
    pub fn demand(&self) -> &[usize] {
        &self.demand
    }

    pub fn demand_is_everything(&self) -> bool {
        self.demand.len() == self.space.len()
    }

    pub fn dist_to(&self, ball: usize, point: usize) -> &Rational {
        self.space.dist(self.balls[ball].center, point)
    }

    /// `d(c_i, p_j) ≤ β·r_i`, exactly.
    pub fn contains(&self, ball: usize, point: usize, beta: &Rational) -> bool {
        let b = &self.balls[ball];
        *self.space.dist(b.center, point) <= beta * &b.radius
    }

    /// Containment under an expansion factor from ℚ(√5).
    pub fn contains_expanded(&self, ball: usize, point: usize, beta: &Quadratic) -> bool {
        let b = &self.balls[ball];
        beta.bounds(self.space.dist(b.center, point), &b.radius)
    }

    /// Whether the two (unexpanded) balls share a site of the metric space.
    pub fn intersects(&self, a: usize, b: usize) -> bool {
        let one = Rational::one();
        (0..self.space.len()).any(|q| self.contains(a, q, &one) && self.contains(b, q, &one))
    }

    pub fn balls_containing(&self, point: usize) -> impl Iterator<Item = usize> + '_ {
        let one = Rational::one();
        self.balls.iter().map(|b| b.id).filter(move |&i| self.contains(i, point, &one))
    }

    /// Ordering used for every "largest ball" decision: larger radius, then
    /// larger capacity, then lower id comes first.
    pub fn size_order(&self, a: usize, b: usize) -> std::cmp::Ordering {
        let (ba, bb) = (&self.balls[a], &self.balls[b]);
        bb.radius.cmp(&ba.radius).then(bb.capacity.cmp(&ba.capacity)).then(a.cmp(&b))
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::arith::int;

    #[test]
    fn contains_at_center_for_any_beta() {
        let inst = line3(Variant::Monotonic);
        assert!(inst.contains(0, 0, &int(1)));
        assert!(inst.contains(1, 2, &crate::arith::rat(1, 1000)));
    }

    #[test]
    fn contains_line3_far_point_needs_beta_two() {
        let inst = line3(Variant::Monotonic);
        assert!(!inst.contains(0, 2, &int(1)));
        assert!(inst.contains(0, 2, &int(2)));
    }

    #[test]
    fn uncovered_point_rejected() {
        let balls = vec![Ball { id: 0, center: 0, radius: int(1), capacity: 3 }];
        let err = Instance::new(line_metric(&[0, 1, 2]), balls, Variant::Uniform).unwrap_err();
        assert!(matches!(err, Error::UncoveredPoint { point: 2 }));
    }

    #[test]
    fn variant_invariants_enforced() {
        let balls = vec![
            Ball { id: 0, center: 0, radius: int(2), capacity: 1 },
            Ball { id: 1, center: 1, radius: int(1), capacity: 2 },
        ];
        let space = line_metric(&[0, 1]);
        assert!(Instance::new(space.clone(), balls.clone(), Variant::Monotonic).is_err());
        assert!(Instance::new(space, balls, Variant::Uniform).is_err());
    }

    #[test]
    fn equal_radii_need_equal_monotonic_capacities() {
        let balls = vec![
            Ball { id: 0, center: 0, radius: int(1), capacity: 1 },
            Ball { id: 1, center: 1, radius: int(1), capacity: 2 },
        ];
        assert!(Instance::new(line_metric(&[0, 1]), balls, Variant::Monotonic).is_err());
    }

    #[test]
    fn size_order_breaks_ties_by_capacity_then_id() {
        let balls = vec![
            Ball { id: 0, center: 0, radius: int(1), capacity: 2 },
            Ball { id: 1, center: 1, radius: int(2), capacity: 3 },
            Ball { id: 2, center: 1, radius: int(1), capacity: 2 },
        ];
        let inst = Instance::new(line_metric(&[0, 1]), balls, Variant::Monotonic).unwrap();
        let mut ids = vec![2, 0, 1];
        ids.sort_by(|&a, &b| inst.size_order(a, b));
        assert_eq!(ids, vec![1, 0, 2]);
    }
}
