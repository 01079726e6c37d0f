use std::fmt;

use num_traits::{Signed, Zero};

use crate::arith::{fmt_rational, from_u64, int, Rational};

/// A finite metric space given by its full distance matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpace {
    dist: Vec<Vec<Rational>>,
}

/// First axiom violation found by [`validate_metric`], with witness indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricViolation {
    NotSquare { row: usize, len: usize, expected: usize },
    Negative { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MetricViolation::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            MetricViolation::Negative { i, j } => write!(f, "negative distance at ({i},{j})"),
            MetricViolation::NonzeroDiagonal { i } => write!(f, "nonzero diagonal at ({i},{i})"),
            MetricViolation::Asymmetric { i, j } => write!(f, "asymmetry at ({i},{j})"),
            MetricViolation::Triangle { i, j, k } => {
                write!(f, "triangle violation at ({i},{j},{k}): d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
        }
    }
}

/// Checks the metric axioms on a raw matrix. Reports the first violation in
/// the order: shape, sign, diagonal, symmetry, triangle inequality.
pub fn validate_metric(dist: &[Vec<Rational>]) -> Result<(), MetricViolation> {
    let n = dist.len();
    for (row, entries) in dist.iter().enumerate() {
        if entries.len() != n {
            return Err(MetricViolation::NotSquare { row, len: entries.len(), expected: n });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if dist[i][j].is_negative() {
                return Err(MetricViolation::Negative { i, j });
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| !dist[i][i].is_zero()) {
        return Err(MetricViolation::NonzeroDiagonal { i });
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                return Err(MetricViolation::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if dist[i][k] > &dist[i][j] + &dist[j][k] {
                    return Err(MetricViolation::Triangle { i, j, k });
                }
            }
        }
    }
    Ok(())
}

impl MetricSpace {
    pub fn new(dist: Vec<Vec<Rational>>) -> Result<Self, MetricViolation> {
        validate_metric(&dist)?;
        Ok(MetricSpace { dist })
    }

    /// ℓ1 metric induced by integer planar coordinates.
    pub fn from_grid(coords: &[(i64, i64)]) -> Self {
        let dist = coords
            .iter()
            .map(|&(ax, ay)| coords.iter().map(|&(bx, by)| int((ax - bx).abs() + (ay - by).abs())).collect())
            .collect();
        MetricSpace { dist }
    }

    /// Shortest-path completion of a weighted undirected graph. Pairs in
    /// different components are placed at distance `max(floor, diameter)`,
    /// which keeps the triangle inequality intact.
    pub fn shortest_path_completion(n: usize, edges: &[(usize, usize, Rational)], floor: &Rational) -> Self {
        let mut best: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
        for (i, row) in best.iter_mut().enumerate() {
            row[i] = Some(Rational::zero());
        }
        for (a, b, w) in edges {
            let better = best[*a][*b].as_ref().is_none_or(|cur| w < cur);
            if better {
                best[*a][*b] = Some(w.clone());
                best[*b][*a] = Some(w.clone());
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = best[i][k].clone() else { continue };
                for j in 0..n {
                    if let Some(kj) = &best[k][j] {
                        let via = &ik + kj;
                        if best[i][j].as_ref().is_none_or(|cur| via < *cur) {
                            best[i][j] = Some(via);
                        }
                    }
                }
            }
        }
        let diameter = best.iter().flatten().flatten().max().cloned().unwrap_or_else(Rational::zero);
        let gap = if &diameter > floor { diameter } else { floor.clone() };
        let dist =
            best.into_iter().map(|row| row.into_iter().map(|d| d.unwrap_or_else(|| gap.clone())).collect()).collect();
        MetricSpace { dist }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub(crate) fn render_row(&self, i: usize) -> String {
        self.dist[i].iter().map(fmt_rational).collect::<Vec<_>>().join(" ")
    }
}

/// Convenience for tests and generators: the line metric `d(i,j) = |x_i - x_j|`.
pub fn line_metric(positions: &[u64]) -> MetricSpace {
    let dist = positions.iter().map(|&a| positions.iter().map(|&b| from_u64(a.abs_diff(b))).collect()).collect();
    MetricSpace { dist }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn line_metric_is_valid() {
        assert_eq!(validate_metric(line_metric(&[0, 1, 2]).rows()), Ok(()));
    }

    #[test]
    fn asymmetry_reported_with_indices() {
        let d = matrix(&[&[0, 1], &[2, 0]]);
        assert_eq!(validate_metric(&d), Err(MetricViolation::Asymmetric { i: 0, j: 1 }));
    }

    #[test]
    fn triangle_violation_reported_with_indices() {
        let d = matrix(&[&[0, 1, 5], &[1, 0, 1], &[5, 1, 0]]);
        assert_eq!(validate_metric(&d), Err(MetricViolation::Triangle { i: 0, j: 1, k: 2 }));
    }

    #[test]
    fn negative_and_diagonal() {
        assert_eq!(validate_metric(&matrix(&[&[0, -1], &[-1, 0]])), Err(MetricViolation::Negative { i: 0, j: 1 }));
        assert_eq!(validate_metric(&matrix(&[&[0, 1], &[1, 3]])), Err(MetricViolation::NonzeroDiagonal { i: 1 }));
        assert!(matches!(validate_metric(&matrix(&[&[0, 1], &[1]])), Err(MetricViolation::NotSquare { row: 1, .. })));
    }

    #[test]
    fn shortest_path_completion_of_a_path() {
        let edges = vec![(0, 1, int(1)), (1, 2, int(1)), (2, 3, int(1))];
        let m = MetricSpace::shortest_path_completion(5, &edges, &int(3));
        assert_eq!(m.dist(0, 3), &int(3));
        // Vertex 4 is isolated and sits at max(floor, diameter) = 3.
        assert_eq!(m.dist(4, 0), &int(3));
        assert_eq!(validate_metric(m.rows()), Ok(()));
    }
}
