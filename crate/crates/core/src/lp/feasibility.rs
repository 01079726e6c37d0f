use std::fmt;

use num_traits::{Signed, Zero};

use crate::arith::{fmt_rational, Rational};

use super::{FractionalSolution, LpModel, Relation, RowKind, VarKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Row(RowKind),
    Negative(VarKey),
    AboveUpper(VarKey),
    /// The solution sets a variable the model does not have (e.g. an `x`
    /// for a point outside the ball).
    UnknownVariable(VarKey),
}

/// One violated constraint; `slack` is the (positive) amount by which it
/// is missed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub slack: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Row(r) => write!(f, "{r}")?,
            ViolationKind::Negative(v) => write!(f, "{v} < 0")?,
            ViolationKind::AboveUpper(v) => write!(f, "{v} above bound")?,
            ViolationKind::UnknownVariable(v) => write!(f, "{v} not in model")?,
        }
        write!(f, " by {}", fmt_rational(&self.slack))
    }
}

pub fn check_lp_feasibility(solution: &FractionalSolution, model: &LpModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let values: Vec<Rational> = model.vars().iter().map(|k| solution.value(k)).collect();
    for row in model.rows() {
        let lhs: Rational = row.coeffs.iter().map(|(v, c)| c * &values[*v]).sum();
        let miss = match row.relation {
            Relation::Le => &lhs - &row.rhs,
            Relation::Ge => &row.rhs - &lhs,
            Relation::Eq => (&lhs - &row.rhs).abs(),
        };
        if miss.is_positive() {
            out.push(Violation { kind: ViolationKind::Row(row.kind), slack: miss });
        }
    }
    for (v, key) in model.vars().iter().enumerate() {
        if values[v].is_negative() {
            out.push(Violation { kind: ViolationKind::Negative(*key), slack: -values[v].clone() });
        }
        if let Some(ub) = &model.upper_bounds()[v] {
            if values[v] > *ub {
                out.push(Violation { kind: ViolationKind::AboveUpper(*key), slack: &values[v] - ub });
            }
        }
    }
    let unknown =
        solution.ys().map(|(b, v)| (VarKey::Y(b), v)).chain(solution.xs().map(|((b, p), v)| (VarKey::X(b, p), v)));
    for (key, v) in unknown {
        if model.var_index(&key).is_none() && !v.is_zero() {
            out.push(Violation { kind: ViolationKind::UnknownVariable(key), slack: v.abs() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::instance::fixtures::{line3, single};
    use crate::instance::Variant;
    use crate::lp::{build_mmcc_lp, solve_lp};

    #[test]
    fn solved_model_has_no_violations() {
        let m = build_mmcc_lp(&line3(Variant::Monotonic)).unwrap();
        let s = solve_lp(&m).unwrap().solution;
        assert!(check_lp_feasibility(&s, &m).is_empty());
    }

    #[test]
    fn halving_leaves_each_point_half_short() {
        let m = build_mmcc_lp(&line3(Variant::Monotonic)).unwrap();
        let s = solve_lp(&m).unwrap().solution.scaled(&rat(1, 2));
        let v = check_lp_feasibility(&s, &m);
        assert_eq!(v.len(), 3);
        for (p, viol) in v.iter().enumerate() {
            assert_eq!(viol.kind, ViolationKind::Row(RowKind::Flow { point: p }));
            assert_eq!(viol.slack, rat(1, 2));
        }
    }

    #[test]
    fn x_above_y_reported() {
        let m = build_mmcc_lp(&single()).unwrap();
        let mut s = FractionalSolution::new();
        s.set_y(0, rat(1, 2));
        s.set_x(0, 0, int(1));
        let v = check_lp_feasibility(&s, &m);
        assert!(
            v.contains(&Violation { kind: ViolationKind::Row(RowKind::Open { ball: 0, point: 0 }), slack: rat(1, 2) })
        );
    }

    #[test]
    fn bounds_and_unknown_variables() {
        let m = build_mmcc_lp(&line3(Variant::Monotonic)).unwrap();
        let mut s = FractionalSolution::new();
        s.set_y(0, int(2));
        s.set_x(0, 2, int(1));
        let v = check_lp_feasibility(&s, &m);
        assert!(v.iter().any(|x| x.kind == ViolationKind::AboveUpper(VarKey::Y(0)) && x.slack == int(1)));
        assert!(v.iter().any(|x| x.kind == ViolationKind::UnknownVariable(VarKey::X(0, 2))));
    }
}
