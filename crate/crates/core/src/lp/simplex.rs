//! Two-phase primal simplex on a dense tableau with Bland's rule.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::Rational;
use crate::error::{Error, Result};

use super::{FractionalSolution, LpModel, Relation, RowKind, VarKey};

/// Where a standard-form row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowOrigin {
    Model(RowKind),
    Bound(VarKey),
}

/// A basic column of the final tableau.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisColumn {
    Var(VarKey),
    Slack(RowOrigin),
}

impl fmt::Display for BasisColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisColumn::Var(v) => write!(f, "{v}"),
            BasisColumn::Slack(RowOrigin::Model(r)) => write!(f, "slack:{r}"),
            BasisColumn::Slack(RowOrigin::Bound(v)) => write!(f, "slack:bound:{v}"),
        }
    }
}

/// Phase-1 certificate of infeasibility.
///
/// With `λ` the row multipliers (bounds act as `≤` rows): `λ ≤ 0` on `≤`
/// rows, `λ ≥ 0` on `≥` rows, `λᵀA ≤ 0` column-wise and `λᵀb > 0`. Any
/// `x ≥ 0` satisfying the rows would give `0 ≥ λᵀAx ≥ λᵀb > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub phase_one_value: Rational,
    pub row_multipliers: Vec<Rational>,
    pub bound_multipliers: Vec<(usize, Rational)>,
}

impl InfeasibilityCertificate {
    pub fn verify(&self, model: &LpModel) -> bool {
        let n = model.vars().len();
        let mut col = vec![Rational::zero(); n];
        let mut lb = Rational::zero();
        for (row, lambda) in model.rows().iter().zip(&self.row_multipliers) {
            let sign_ok = match row.relation {
                Relation::Le => !lambda.is_positive(),
                Relation::Ge => !lambda.is_negative(),
                Relation::Eq => true,
            };
            if !sign_ok {
                return false;
            }
            for (v, c) in &row.coeffs {
                col[*v] += lambda * c;
            }
            lb += lambda * &row.rhs;
        }
        for (v, lambda) in &self.bound_multipliers {
            let Some(ub) = &model.upper_bounds()[*v] else { return false };
            if lambda.is_positive() {
                return false;
            }
            col[*v] += lambda;
            lb += lambda * ub;
        }
        self.row_multipliers.len() == model.rows().len() && lb.is_positive() && col.iter().all(|c| !c.is_positive())
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub solution: FractionalSolution,
    pub objective: Rational,
    pub basis: Vec<BasisColumn>,
}

/// `A x (+ slack) = b` with `b ≥ 0`; columns are the model variables followed
/// by one slack or surplus column per inequality row.
struct Standard {
    n_struct: usize,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    sign: Vec<bool>,
    origin: Vec<RowOrigin>,
    /// Column and coefficient (+1 slack, −1 surplus) of each row's slack.
    slack: Vec<Option<(usize, bool)>>,
    columns: Vec<BasisColumn>,
}

impl Standard {
    fn new(model: &LpModel) -> Self {
        let n_struct = model.vars().len();
        let mut raw: Vec<(RowOrigin, Vec<(usize, Rational)>, Relation, Rational)> = model
            .rows()
            .iter()
            .map(|r| (RowOrigin::Model(r.kind), r.coeffs.clone(), r.relation, r.rhs.clone()))
            .collect();
        for (v, ub) in model.upper_bounds().iter().enumerate() {
            if let Some(ub) = ub {
                raw.push((RowOrigin::Bound(model.vars()[v]), vec![(v, Rational::one())], Relation::Le, ub.clone()));
            }
        }
        let n_slack = raw.iter().filter(|r| r.2 != Relation::Eq).count();
        let width = n_struct + n_slack;
        let mut columns: Vec<BasisColumn> = model.vars().iter().map(|k| BasisColumn::Var(*k)).collect();
        let mut std = Standard {
            n_struct,
            rows: Vec::with_capacity(raw.len()),
            rhs: Vec::with_capacity(raw.len()),
            sign: Vec::with_capacity(raw.len()),
            origin: Vec::with_capacity(raw.len()),
            slack: Vec::with_capacity(raw.len()),
            columns: Vec::new(),
        };
        for (origin, coeffs, relation, rhs) in raw {
            let negate = rhs.is_negative();
            let mut dense = vec![Rational::zero(); width];
            for (v, c) in coeffs {
                dense[v] += if negate { -c } else { c };
            }
            let relation = match (relation, negate) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            let slack = match relation {
                Relation::Eq => None,
                r => {
                    let col = columns.len();
                    columns.push(BasisColumn::Slack(origin));
                    let plus = r == Relation::Le;
                    dense[col] = if plus { Rational::one() } else { -Rational::one() };
                    Some((col, plus))
                }
            };
            std.rows.push(dense);
            std.rhs.push(if negate { -rhs } else { rhs });
            std.sign.push(!negate);
            std.origin.push(origin);
            std.slack.push(slack);
        }
        std.columns = columns;
        std
    }

    fn width(&self) -> usize {
        self.columns.len()
    }
}

struct Tableau {
    /// Constraint rows, each `width + 1` long with the rhs last.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs, with minus the objective value last.
    obj: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let mut prow = std::mem::take(&mut self.rows[r]);
        let piv = prow[e].clone();
        if !piv.is_one() {
            for v in prow.iter_mut().filter(|v| !v.is_zero()) {
                *v /= &piv;
            }
        }
        let nz: Vec<usize> = (0..prow.len()).filter(|&k| !prow[k].is_zero()).collect();
        let eliminate = |row: &mut Vec<Rational>| {
            let f = row[e].clone();
            if f.is_zero() {
                return;
            }
            for &k in &nz {
                let d = &f * &prow[k];
                row[k] -= d;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = prow;
        self.basis[r] = e;
    }

    /// Bland's rule over columns `0..limit`. `Ok(false)` means unbounded.
    fn optimize(&mut self, limit: usize) -> bool {
        loop {
            let Some(e) = (0..limit).find(|&j| self.obj[j].is_negative()) else { return true };
            let rhs = self.rows.first().map_or(0, |r| r.len() - 1);
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[e];
                let better = match &best {
                    None => true,
                    Some((b, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*b]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else { return false };
            self.pivot(r, e);
        }
    }
}

/// Exact optimum of `model`, or an infeasibility certificate.
pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    let std = Standard::new(model);
    let m = std.rows.len();
    let width = std.width();

    // Phase 1: an artificial for every row without a `+1` slack.
    let art_rows: Vec<usize> = (0..m).filter(|&i| !matches!(std.slack[i], Some((_, true)))).collect();
    let total = width + art_rows.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = vec![0; m];
    let mut art_col = vec![None; m];
    for i in 0..m {
        let mut row = std.rows[i].clone();
        row.resize(total + 1, Rational::zero());
        row[total] = std.rhs[i].clone();
        rows.push(row);
        if let Some((c, true)) = std.slack[i] {
            basis[i] = c;
        }
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][width + k] = Rational::one();
        basis[i] = width + k;
        art_col[i] = Some(width + k);
    }
    let mut obj = vec![Rational::zero(); total + 1];
    for &i in &art_rows {
        for (o, v) in obj.iter_mut().zip(&rows[i]) {
            *o -= v;
        }
    }
    for &i in &art_rows {
        obj[art_col[i].unwrap()] = Rational::zero();
    }
    let mut tab = Tableau { rows, obj, basis };
    if !tab.optimize(total) {
        return Err(Error::Invariant("phase 1 reported unbounded".into()));
    }
    let phase_one_value = -tab.obj[total].clone();
    if phase_one_value.is_positive() {
        return Err(Error::Infeasible(Box::new(certificate(model, &std, &tab, &art_col, phase_one_value))));
    }

    // Drive remaining artificials out; rows with no real entry are redundant.
    let mut redundant = Vec::new();
    for r in 0..m {
        if tab.basis[r] < width {
            continue;
        }
        match (0..width).find(|&j| !tab.rows[r][j].is_zero()) {
            Some(j) => tab.pivot(r, j),
            None => redundant.push(r),
        }
    }
    let keep: Vec<usize> = (0..m).filter(|r| !redundant.contains(r)).collect();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(keep.len());
    let mut basis = Vec::with_capacity(keep.len());
    for &r in &keep {
        let mut row = std::mem::take(&mut tab.rows[r]);
        let rhs = row[total].clone();
        row.truncate(width);
        row.push(rhs);
        rows.push(row);
        basis.push(tab.basis[r]);
    }

    // Phase 2 on the original objective.
    let cost = |j: usize| -> Rational {
        if j < std.n_struct {
            model.objective()[j].clone()
        } else {
            Rational::zero()
        }
    };
    let mut obj: Vec<Rational> = (0..width).map(cost).collect();
    obj.push(Rational::zero());
    for (row, &b) in rows.iter().zip(&basis) {
        let cb = cost(b);
        if cb.is_zero() {
            continue;
        }
        for (o, v) in obj.iter_mut().zip(row) {
            *o -= &cb * v;
        }
    }
    let mut tab = Tableau { rows, obj, basis };
    if !tab.optimize(width) {
        return Err(Error::Invariant("LP is unbounded".into()));
    }

    let mut values = vec![Rational::zero(); std.n_struct];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        if b < std.n_struct {
            values[b] = row[width].clone();
        }
    }
    let mut basis: Vec<BasisColumn> = tab.basis.iter().map(|&b| std.columns[b]).collect();
    basis.sort_by_key(|c| format!("{c}"));
    Ok(LpSolution { solution: to_solution(model, &values), objective: -tab.obj[width].clone(), basis })
}

fn to_solution(model: &LpModel, values: &[Rational]) -> FractionalSolution {
    let mut s = FractionalSolution::new();
    for (key, v) in model.vars().iter().zip(values) {
        match *key {
            VarKey::Y(b) => s.set_y(b, v.clone()),
            VarKey::X(b, p) => s.set_x(b, p, v.clone()),
        }
    }
    s
}

fn certificate(
    model: &LpModel,
    std: &Standard,
    tab: &Tableau,
    art_col: &[Option<usize>],
    phase_one_value: Rational,
) -> InfeasibilityCertificate {
    // Phase-1 duals from reduced costs: an artificial column `e_i` with cost 1
    // has reduced cost `1 − π_i`; a `+1` slack with cost 0 has `−π_i`.
    let mut row_multipliers = vec![Rational::zero(); model.rows().len()];
    let mut bound_multipliers = Vec::new();
    let mut model_row = 0;
    for i in 0..std.rows.len() {
        let pi = match (art_col[i], std.slack[i]) {
            (Some(a), _) => Rational::one() - &tab.obj[a],
            (None, Some((s, _))) => -tab.obj[s].clone(),
            (None, None) => unreachable!("equality rows always carry an artificial"),
        };
        let lambda = if std.sign[i] { pi } else { -pi };
        match std.origin[i] {
            RowOrigin::Model(_) => {
                row_multipliers[model_row] = lambda;
                model_row += 1;
            }
            RowOrigin::Bound(key) => {
                bound_multipliers.push((model.var_index(&key).expect("bound on a model variable"), lambda));
            }
        }
    }
    InfeasibilityCertificate { phase_one_value, row_multipliers, bound_multipliers }
}

/// Solves `B x_B = b` for the given basic columns and returns the induced
/// basic solution. Fails if the columns are not a basis of the standard form
/// or the induced point is infeasible.
pub fn reconstruct_from_basis(model: &LpModel, basis: &[BasisColumn]) -> Result<FractionalSolution> {
    let std = Standard::new(model);
    let cols: Vec<usize> = basis
        .iter()
        .map(|c| {
            std.columns
                .iter()
                .position(|x| x == c)
                .ok_or_else(|| Error::Invariant(format!("basis column {c} not in model")))
        })
        .collect::<Result<_>>()?;
    let k = cols.len();
    let mut sys: Vec<Vec<Rational>> = std
        .rows
        .iter()
        .zip(&std.rhs)
        .map(|(row, b)| {
            let mut r: Vec<Rational> = cols.iter().map(|&c| row[c].clone()).collect();
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivot_of = vec![0; k];
    for (c, slot) in pivot_of.iter_mut().enumerate() {
        let Some(p) = (pivot_row..sys.len()).find(|&i| !sys[i][c].is_zero()) else {
            return Err(Error::Invariant("basis columns are linearly dependent".into()));
        };
        sys.swap(pivot_row, p);
        let piv = sys[pivot_row][c].clone();
        for v in sys[pivot_row].iter_mut() {
            *v /= &piv;
        }
        let prow = sys[pivot_row].clone();
        for (i, row) in sys.iter_mut().enumerate() {
            if i != pivot_row && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= &f * p;
                }
            }
        }
        *slot = pivot_row;
        pivot_row += 1;
    }
    if sys[pivot_row..].iter().any(|r| !r[k].is_zero()) {
        return Err(Error::Invariant("basis does not satisfy every row".into()));
    }
    let mut values = vec![Rational::zero(); std.n_struct];
    for (c, &r) in pivot_of.iter().enumerate() {
        let v = &sys[r][k];
        if v.is_negative() {
            return Err(Error::Invariant(format!("basic column {} is negative", basis[c])));
        }
        if cols[c] < std.n_struct {
            values[cols[c]] = v.clone();
        }
    }
    Ok(to_solution(model, &values))
}
