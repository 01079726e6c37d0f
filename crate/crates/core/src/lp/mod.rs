//! The natural covering LP and its two auxiliary restrictions, over exact
//! rationals.
//!
//! Every model in this module shares one shape: a `y` variable per ball, an
//! `x` variable per (ball, point) pair with the point inside the ball, open
//! rows `x ≤ y`, capacity rows `Σ x ≤ U·y`, and one coverage row per point
//! (`= 1` or `≥ d`). Pairs with the point outside the ball are omitted rather
//! than pinned to zero.

mod feasibility;
mod simplex;

pub use feasibility::{check_lp_feasibility, Violation, ViolationKind};
pub use simplex::{reconstruct_from_basis, solve_lp, BasisColumn, InfeasibilityCertificate, LpSolution};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{fmt_rational, Rational};
use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Y(usize),
    /// `(ball, point)`
    X(usize, usize),
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Y(i) => write!(f, "y[{i}]"),
            VarKey::X(i, j) => write!(f, "x[{i},{j}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// Which family a constraint row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowKind {
    /// `x_ij ≤ y_i`
    Open { ball: usize, point: usize },
    /// `Σ_j x_ij ≤ U_i · y_i`
    Capacity { ball: usize },
    /// `Σ_i x_ij = 1`
    Flow { point: usize },
    /// `Σ_i x_ij ≥ d_j`
    Demand { point: usize },
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowKind::Open { ball, point } => write!(f, "open[{ball},{point}]"),
            RowKind::Capacity { ball } => write!(f, "capacity[{ball}]"),
            RowKind::Flow { point } => write!(f, "flow[{point}]"),
            RowKind::Demand { point } => write!(f, "demand[{point}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A minimization LP with non-negative variables and optional upper bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    vars: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
    objective: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    rows: Vec<Row>,
}

impl LpModel {
    fn new() -> Self {
        LpModel { vars: Vec::new(), index: HashMap::new(), objective: Vec::new(), upper: Vec::new(), rows: Vec::new() }
    }

    fn add_var(&mut self, key: VarKey, cost: Rational, upper: Option<Rational>) -> usize {
        debug_assert!(!self.index.contains_key(&key), "variable {key} added twice");
        let idx = self.vars.len();
        self.vars.push(key);
        self.index.insert(key, idx);
        self.objective.push(cost);
        self.upper.push(upper);
        idx
    }

    pub fn vars(&self) -> &[VarKey] {
        &self.vars
    }

    pub fn var_index(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn upper_bounds(&self) -> &[Option<Rational>] {
        &self.upper
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn y_count(&self) -> usize {
        self.vars.iter().filter(|k| matches!(k, VarKey::Y(_))).count()
    }

    /// Human-readable constraint listing (`--dump-lp`). Not a stable format.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let term = |(v, c): &(usize, Rational)| format!("{} {}", fmt_rational(c), self.vars[*v]);
        let mut out = String::new();
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| term(&(v, c.clone())))
            .collect();
        writeln!(out, "minimize {}", obj.join(" + ")).unwrap();
        for row in &self.rows {
            let lhs: Vec<String> = row.coeffs.iter().map(term).collect();
            writeln!(out, "  {}: {} {} {}", row.kind, lhs.join(" + "), row.relation, fmt_rational(&row.rhs)).unwrap();
        }
        for (v, ub) in self.upper.iter().enumerate() {
            if let Some(ub) = ub {
                writeln!(out, "  bound: 0 <= {} <= {}", self.vars[v], fmt_rational(ub)).unwrap();
            }
        }
        out
    }
}

/// Coverage requirement of one point in a covering model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverage {
    Exactly(Rational),
    AtLeast(Rational),
}

/// Shared constructor: `balls` are `(ball id, capacity)` pairs, `points`
/// carry their coverage rows. Only pairs with the point inside the ball at
/// expansion 1 get an `x` variable.
pub fn build_covering_lp(
    instance: &Instance,
    balls: &[(usize, Rational)],
    points: &[(usize, Coverage)],
) -> Result<LpModel> {
    let one = Rational::one();
    let mut model = LpModel::new();
    let mut y_idx = BTreeMap::new();
    for (b, _) in balls {
        y_idx.insert(*b, model.add_var(VarKey::Y(*b), one.clone(), Some(one.clone())));
    }
    let mut per_ball: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    let mut per_point: Vec<Vec<(usize, Rational)>> = Vec::with_capacity(points.len());
    for (p, coverage) in points {
        let mut terms = Vec::new();
        for (b, _) in balls {
            if instance.contains(*b, *p, &one) {
                let x = model.add_var(VarKey::X(*b, *p), Rational::zero(), None);
                model.rows.push(Row {
                    kind: RowKind::Open { ball: *b, point: *p },
                    coeffs: vec![(x, one.clone()), (y_idx[b], -one.clone())],
                    relation: Relation::Le,
                    rhs: Rational::zero(),
                });
                per_ball.entry(*b).or_default().push((x, one.clone()));
                terms.push((x, one.clone()));
            }
        }
        let required = match coverage {
            Coverage::Exactly(v) | Coverage::AtLeast(v) => v,
        };
        if terms.is_empty() && !required.is_zero() {
            return Err(Error::UncoveredPoint { point: *p });
        }
        per_point.push(terms);
    }
    for (b, cap) in balls {
        let mut coeffs = per_ball.remove(b).unwrap_or_default();
        coeffs.push((y_idx[b], -cap.clone()));
        model.rows.push(Row {
            kind: RowKind::Capacity { ball: *b },
            coeffs,
            relation: Relation::Le,
            rhs: Rational::zero(),
        });
    }
    for ((p, coverage), terms) in points.iter().zip(per_point) {
        let (kind, relation, rhs) = match coverage {
            Coverage::Exactly(v) => (RowKind::Flow { point: *p }, Relation::Eq, v.clone()),
            Coverage::AtLeast(v) => (RowKind::Demand { point: *p }, Relation::Ge, v.clone()),
        };
        model.rows.push(Row { kind, coeffs: terms, relation, rhs });
    }
    Ok(model)
}

/// The natural relaxation: every ball at its capacity, every demand point
/// fully served.
pub fn build_mmcc_lp(instance: &Instance) -> Result<LpModel> {
    let balls: Vec<_> = instance.balls().iter().map(|b| (b.id, b.capacity_rational())).collect();
    let points: Vec<_> = instance.demand().iter().map(|&p| (p, Coverage::Exactly(Rational::one()))).collect();
    build_covering_lp(instance, &balls, &points)
}

/// First auxiliary model: heavy and first-copy light balls with scaled
/// capacities, restricted to the points served mostly by heavy balls.
pub fn build_aux_lp1(instance: &Instance, balls: &[(usize, Rational)], points: &[usize]) -> Result<LpModel> {
    let points: Vec<_> = points.iter().map(|&p| (p, Coverage::Exactly(Rational::one()))).collect();
    build_covering_lp(instance, balls, &points)
}

/// Second auxiliary model: second-copy light balls with scaled capacities
/// and per-point demands.
pub fn build_aux_lp2(
    instance: &Instance,
    balls: &[(usize, Rational)],
    demands: &BTreeMap<usize, Rational>,
) -> Result<LpModel> {
    let points: Vec<_> = demands.iter().map(|(&p, d)| (p, Coverage::AtLeast(d.clone()))).collect();
    build_covering_lp(instance, balls, &points)
}

/// Fractional `(x, y)`; absent entries are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FractionalSolution {
    y: BTreeMap<usize, Rational>,
    x: BTreeMap<(usize, usize), Rational>,
    cost: Rational,
}

impl FractionalSolution {
    pub fn new() -> Self {
        FractionalSolution::default()
    }

    pub fn y(&self, ball: usize) -> Rational {
        self.y.get(&ball).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn x(&self, ball: usize, point: usize) -> Rational {
        self.x.get(&(ball, point)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set_y(&mut self, ball: usize, value: Rational) {
        let old = if value.is_zero() { self.y.remove(&ball) } else { self.y.insert(ball, value.clone()) };
        self.cost += value - old.unwrap_or_else(Rational::zero);
    }

    pub fn set_x(&mut self, ball: usize, point: usize, value: Rational) {
        if value.is_zero() {
            self.x.remove(&(ball, point));
        } else {
            self.x.insert((ball, point), value);
        }
    }

    /// `Σ y`, maintained incrementally.
    pub fn cost(&self) -> &Rational {
        &self.cost
    }

    pub fn ys(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.y.iter().map(|(b, v)| (*b, v))
    }

    pub fn xs(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> {
        self.x.iter().map(|(k, v)| (*k, v))
    }

    /// Points served by `ball`, ascending, with their flow.
    pub fn row(&self, ball: usize) -> impl Iterator<Item = (usize, &Rational)> {
        self.x.range((ball, 0)..=(ball, usize::MAX)).map(|((_, p), v)| (*p, v))
    }

    pub fn flow_out(&self, ball: usize) -> Rational {
        self.x.range((ball, 0)..=(ball, usize::MAX)).map(|(_, v)| v).sum()
    }

    pub fn inflow(&self, point: usize) -> Rational {
        self.x.iter().filter(|((_, p), _)| *p == point).map(|(_, v)| v).sum()
    }

    pub fn value(&self, key: &VarKey) -> Rational {
        match *key {
            VarKey::Y(b) => self.y(b),
            VarKey::X(b, p) => self.x(b, p),
        }
    }

    /// Scales every `x` and `y` by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Self {
        let mut out = FractionalSolution::new();
        for (b, v) in self.ys() {
            out.set_y(b, v * factor);
        }
        for ((b, p), v) in self.xs() {
            out.set_x(b, p, v * factor);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::instance::fixtures::{line3, single};
    use crate::instance::Variant;

    #[test]
    fn single_ball_model_shape() {
        let m = build_mmcc_lp(&single()).unwrap();
        assert_eq!(m.vars(), &[VarKey::Y(0), VarKey::X(0, 0)]);
        assert_eq!(m.rows().len(), 3);
        assert_eq!(m.upper_bounds()[0], Some(int(1)));
    }

    #[test]
    fn line3_omits_uncontained_pairs() {
        let m = build_mmcc_lp(&line3(Variant::Monotonic)).unwrap();
        assert!(m.var_index(&VarKey::X(0, 2)).is_none());
        assert!(m.var_index(&VarKey::X(1, 0)).is_none());
        assert!(m.var_index(&VarKey::X(0, 1)).is_some());
        assert_eq!(m.y_count(), 2);
        // Every variable appears in the index exactly once.
        for (i, k) in m.vars().iter().enumerate() {
            assert_eq!(m.var_index(k), Some(i));
        }
    }

    #[test]
    fn uncovered_point_is_an_error() {
        let inst = line3(Variant::Monotonic);
        let err = build_covering_lp(&inst, &[(0, int(2))], &[(2, Coverage::Exactly(int(1)))]).unwrap_err();
        assert!(matches!(err, Error::UncoveredPoint { point: 2 }));
    }

    #[test]
    fn cost_tracks_y_exactly() {
        let mut s = FractionalSolution::new();
        s.set_y(0, rat(1, 3));
        s.set_y(1, rat(1, 6));
        s.set_y(0, rat(1, 2));
        assert_eq!(s.cost(), &rat(2, 3));
        s.set_y(1, Rational::zero());
        assert_eq!(s.cost(), &rat(1, 2));
        assert_eq!(s.ys().count(), 1);
    }

    #[test]
    fn dump_lists_rows() {
        let text = build_mmcc_lp(&single()).unwrap().dump();
        assert!(text.starts_with("minimize 1/1 y[0]"));
        assert!(text.contains("flow[0]: 1/1 x[0,0] = 1/1"));
    }
}
