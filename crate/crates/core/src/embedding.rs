//! Isometric embeddings into the function tree.
//!
//! `brush` realizes any finite tree metric as a family of piecewise-linear
//! functions: vertex 0 becomes the zero function, and each later vertex
//! copies an already-built function up to the branch abscissa, then departs
//! along a fresh slope taken from a strictly increasing schedule. Because
//! every new slope exceeds all slopes already present at the attachment
//! point, the segregation moment of any two built functions is exactly
//! their Gromov product, and all pairwise distances are reproduced without
//! error.
//!
//! `embed_discrete` is the separate inclusion of the finite-support space
//! into the continuous one: integrate the support, i.e. the image's slope
//! after support time `s_k` is the running sum of coefficients up to `k`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::scalar::{cmp, max, Scalar};
use crate::tree::{DiscreteFunction, Knot, PlFunction};
use crate::Rational;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("distance matrix must be square (row {row} has {got} entries, expected {expected})")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("nonzero diagonal entry at ({i}, {i})")]
    NonzeroDiagonal { i: usize },
    #[error("off-diagonal entry ({i}, {j}) must be positive; duplicate points are not allowed")]
    NonPositiveEntry { i: usize, j: usize },
    #[error("triangle inequality fails on ({i}, {j}, {k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("four-point condition fails on ({i}, {j}, {k}, {l})")]
    FourPointViolation { i: usize, j: usize, k: usize, l: usize },
    #[error("expected {expected} functions, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("slope schedule has {got} slopes but {needed} are needed")]
    ScheduleTooShort { needed: usize, got: usize },
    #[error("slope schedule must be strictly increasing (violated at index {index})")]
    ScheduleNotIncreasing { index: usize },
    #[error("branch abscissa out of range at vertex {vertex}: {detail}")]
    BranchOutOfRange { vertex: usize, detail: String },
    #[error("branch abscissa is negative: the three distances violate the triangle inequality")]
    NegativeAbscissa,
}

/// Symmetric positive distance matrix claimed to be a tree metric.
///
/// Construction checks shape, symmetry, the zero diagonal and positivity;
/// the quadruple certificate is the separate, more expensive [`certify`].
///
/// [`certify`]: TreeMetric::certify
#[derive(Clone, Debug, PartialEq)]
pub struct TreeMetric<T = Rational> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> TreeMetric<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::EmptyMatrix);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare {
                    row,
                    got: r.len(),
                    expected: n,
                });
            }
        }
        for i in 0..n {
            if !rows[i][i].is_zero() {
                return Err(MetricError::NonzeroDiagonal { i });
            }
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(MetricError::NotSymmetric { i, j });
                }
                if cmp(&rows[i][j], &T::zero()) != Ordering::Greater {
                    return Err(MetricError::NonPositiveEntry { i, j });
                }
            }
        }
        Ok(TreeMetric { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    /// Tree-metric certificate: triangle inequality on every triple and the
    /// four-point condition on every quadruple. O(n^4); reports the first
    /// violating tuple.
    pub fn certify(&self) -> Result<(), MetricError> {
        let n = self.len();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let ij = self.rows[i][j].clone();
                    let jk = self.rows[j][k].clone();
                    let ik = self.rows[i][k].clone();
                    let bad = cmp(&ik, &(ij.clone() + jk.clone())) == Ordering::Greater
                        || cmp(&ij, &(ik.clone() + jk.clone())) == Ordering::Greater
                        || cmp(&jk, &(ij + ik)) == Ordering::Greater;
                    if bad {
                        return Err(MetricError::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    for l in (k + 1)..n {
                        // The three pairing sums; a tree metric has its two
                        // largest equal.
                        let p1 = self.rows[i][j].clone() + self.rows[k][l].clone();
                        let p2 = self.rows[i][k].clone() + self.rows[j][l].clone();
                        let p3 = self.rows[i][l].clone() + self.rows[j][k].clone();
                        let hi = max(p1.clone(), max(p2.clone(), p3.clone()));
                        let mut at_max = 0;
                        for p in [&p1, &p2, &p3] {
                            if *p == hi {
                                at_max += 1;
                            }
                        }
                        if at_max < 2 {
                            return Err(MetricError::FourPointViolation { i, j, k, l });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Distance from vertex 1 to the branch point of vertices i and j, read off
/// the three pairwise distances: the Gromov product `(a1i + a1j - aij) / 2`.
pub fn branch_abscissa<T: Scalar>(a1i: T, a1j: T, aij: T) -> Result<T, MetricError> {
    let two = T::one() + T::one();
    let s = (a1i + a1j - aij) / two;
    if cmp(&s, &T::zero()) == Ordering::Less {
        return Err(MetricError::NegativeAbscissa);
    }
    Ok(s)
}

/// Strictly increasing branch slopes, one per vertex after the first.
#[derive(Clone, Debug)]
pub struct SlopeSchedule<T = Rational> {
    slopes: Vec<T>,
}

impl<T: Scalar> SlopeSchedule<T> {
    pub fn new(slopes: Vec<T>) -> Result<Self, MetricError> {
        for i in 1..slopes.len() {
            if cmp(&slopes[i - 1], &slopes[i]) != Ordering::Less {
                return Err(MetricError::ScheduleNotIncreasing { index: i });
            }
        }
        Ok(SlopeSchedule { slopes })
    }

    /// 1, 2, 3, ... The strictly increasing default.
    pub fn naturals(len: usize) -> Self {
        let mut slopes = Vec::with_capacity(len);
        let mut cur = T::one();
        for _ in 0..len {
            slopes.push(cur.clone());
            cur = cur + T::one();
        }
        SlopeSchedule { slopes }
    }

    /// Skips monotonicity validation. Exists so the self-test negative
    /// control can inject a broken schedule.
    #[doc(hidden)]
    pub fn new_unchecked(slopes: Vec<T>) -> Self {
        SlopeSchedule { slopes }
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }
}

/// Embeds the tree metric: vertex 0 becomes the zero function and vertex m
/// attaches to the already-built function with the deepest common prefix.
///
/// For each m the branch abscissa `s_m` is the largest Gromov product
/// `(a_0m + a_0j - a_jm) / 2` over j < m (first maximizer wins; any
/// maximizer carries the same prefix). The new function copies that prefix
/// and continues with schedule slope m-1 out to radius `a_0m`. Distances of
/// the result match the matrix exactly.
pub fn brush<T: Scalar>(
    metric: &TreeMetric<T>,
    schedule: &SlopeSchedule<T>,
) -> Result<Vec<PlFunction<T>>, MetricError> {
    let n = metric.len();
    if schedule.len() + 1 < n {
        return Err(MetricError::ScheduleTooShort {
            needed: n - 1,
            got: schedule.len(),
        });
    }
    let mut fns: Vec<PlFunction<T>> = vec![PlFunction::zero()];
    for m in 1..n {
        let radius = metric.get(0, m).clone();
        // j = 0 gives Gromov product 0, the starting candidate.
        let mut best = T::zero();
        let mut attach = 0usize;
        for j in 1..m {
            let g = branch_abscissa(
                metric.get(0, m).clone(),
                metric.get(0, j).clone(),
                metric.get(j, m).clone(),
            )
            .map_err(|_| MetricError::BranchOutOfRange {
                vertex: m,
                detail: format!("negative Gromov product against vertex {j}"),
            })?;
            if cmp(&g, &best) == Ordering::Greater {
                best = g;
                attach = j;
            }
        }
        let host_radius = if attach == 0 {
            T::zero()
        } else {
            metric.get(0, attach).clone()
        };
        if cmp(&best, &radius) == Ordering::Greater || cmp(&best, &host_radius) == Ordering::Greater
        {
            return Err(MetricError::BranchOutOfRange {
                vertex: m,
                detail: format!(
                    "abscissa {best} exceeds a radius (a_0{m} = {radius}, host = {host_radius})"
                ),
            });
        }
        let prefix = fns[attach]
            .restrict_prefix(&best)
            .expect("abscissa checked against host radius");
        let f = if best == radius {
            // The new vertex lies on the path from the root to its host.
            prefix
        } else {
            let tail_len = radius - best;
            let tail = PlFunction::linear(schedule.slopes()[m - 1].clone(), tail_len)
                .expect("tail length positive");
            prefix.concat(&tail)
        };
        fns.push(f);
    }
    Ok(fns)
}

/// Largest deviation `|d(f_i, f_j) - a_ij|` over all pairs; zero certifies
/// an exact isometry.
pub fn verify_embedding<T: Scalar>(
    metric: &TreeMetric<T>,
    fns: &[PlFunction<T>],
) -> Result<T, MetricError> {
    let n = metric.len();
    if fns.len() != n {
        return Err(MetricError::SizeMismatch {
            expected: n,
            got: fns.len(),
        });
    }
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let dev = (fns[i].distance(&fns[j]) - metric.get(i, j).clone()).abs();
            worst = max(worst, dev);
        }
    }
    Ok(worst)
}

/// Inclusion of the finite-support space into the continuous one:
/// `F(t) = sum over s_k <= t of a_k * (t - s_k)`, a piecewise-linear
/// function whose slope after `s_k` is the running coefficient sum. Two
/// discrete functions first differing at time `t*` get images branching at
/// `t*` (their running sums split by the nonzero coefficient gap), so the
/// distance is preserved exactly.
pub fn embed_discrete<T: Scalar>(g: &DiscreteFunction<T>) -> PlFunction<T> {
    let mut knots = vec![Knot::new(T::zero(), T::zero())];
    let mut slope = T::zero();
    let mut last_t = T::zero();
    let mut last_v = T::zero();
    for k in g.support() {
        let v = last_v.clone() + slope.clone() * (k.time.clone() - last_t.clone());
        knots.push(Knot::new(k.time.clone(), v.clone()));
        slope = slope + k.value.clone();
        last_t = k.time.clone();
        last_v = v;
    }
    if cmp(g.rho(), &last_t) == Ordering::Greater {
        let v = last_v + slope * (g.rho().clone() - last_t);
        knots.push(Knot::new(g.rho().clone(), v));
    }
    PlFunction::new(knots).expect("support invariants give valid breakpoints")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, Rational};

    fn metric(rows: &[&[i64]]) -> TreeMetric<Rational> {
        TreeMetric::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(matches!(
            TreeMetric::<Rational>::from_rows(vec![]),
            Err(MetricError::EmptyMatrix)
        ));
        assert!(matches!(
            TreeMetric::from_rows(vec![vec![rat(0, 1)], vec![rat(1, 1)]]),
            Err(MetricError::NotSquare { row: 0, .. })
        ));
        let asym = TreeMetric::from_rows(vec![
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(2, 1), rat(0, 1)],
        ]);
        assert!(matches!(asym, Err(MetricError::NotSymmetric { i: 0, j: 1 })));
        let dup = TreeMetric::from_rows(vec![
            vec![rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1)],
        ]);
        assert!(matches!(dup, Err(MetricError::NonPositiveEntry { i: 0, j: 1 })));
    }

    #[test]
    fn certificates() {
        // Two points: nothing to check beyond shape.
        metric(&[&[0, 1], &[1, 0]]).certify().unwrap();
        // Star with all leaf distances 2.
        let star = metric(&[
            &[0, 2, 2, 2],
            &[2, 0, 2, 2],
            &[2, 2, 0, 2],
            &[2, 2, 2, 0],
        ]);
        star.certify().unwrap();
        // Graph metric of a 4-cycle: sides 1, diagonals 2. A metric, but the
        // diagonal pairing sum 4 strictly dominates both side pairings.
        let cycle = metric(&[
            &[0, 1, 2, 1],
            &[1, 0, 1, 2],
            &[2, 1, 0, 1],
            &[1, 2, 1, 0],
        ]);
        assert!(matches!(
            cycle.certify(),
            Err(MetricError::FourPointViolation { i: 0, j: 1, k: 2, l: 3 })
        ));
    }

    #[test]
    fn triangle_violation_detected() {
        let bad = metric(&[&[0, 1, 5], &[1, 0, 1], &[5, 1, 0]]);
        assert!(matches!(
            bad.certify(),
            Err(MetricError::TriangleViolation { i: 0, j: 1, k: 2 })
        ));
    }

    #[test]
    fn branch_abscissa_examples() {
        assert_eq!(
            branch_abscissa(rat(2, 1), rat(3, 1), rat(3, 1)).unwrap(),
            rat(1, 1)
        );
        assert_eq!(
            branch_abscissa(rat(1, 1), rat(1, 1), rat(2, 1)).unwrap(),
            rat(0, 1)
        );
        assert_eq!(
            branch_abscissa(rat(5, 1), rat(5, 1), rat(0, 1)).unwrap(),
            rat(5, 1)
        );
        assert!(matches!(
            branch_abscissa(rat(1, 1), rat(1, 1), rat(5, 1)),
            Err(MetricError::NegativeAbscissa)
        ));
    }

    #[test]
    fn brush_three_vertices() {
        let m = metric(&[&[0, 2, 3], &[2, 0, 3], &[3, 3, 0]]);
        let fns = brush(&m, &SlopeSchedule::naturals(2)).unwrap();
        assert_eq!(fns[0], PlFunction::zero());
        assert_eq!(
            fns[1],
            PlFunction::from_pairs(vec![(rat(0, 1), rat(0, 1)), (rat(2, 1), rat(2, 1))]).unwrap()
        );
        assert_eq!(
            fns[2],
            PlFunction::from_pairs(vec![
                (rat(0, 1), rat(0, 1)),
                (rat(1, 1), rat(1, 1)),
                (rat(3, 1), rat(5, 1)),
            ])
            .unwrap()
        );
        assert_eq!(fns[1].distance(&fns[2]), rat(3, 1));
        assert_eq!(verify_embedding(&m, &fns).unwrap(), rat(0, 1));
    }

    #[test]
    fn brush_single_vertex() {
        let m = metric(&[&[0]]);
        let fns = brush(&m, &SlopeSchedule::naturals(0)).unwrap();
        assert_eq!(fns, vec![PlFunction::zero()]);
        assert_eq!(verify_embedding(&m, &fns).unwrap(), rat(0, 1));
    }

    #[test]
    fn brush_vertex_on_a_path() {
        // Vertex 2 sits halfway along the root-to-1 segment: its function is
        // a plain prefix and consumes no schedule slope.
        let m = metric(&[&[0, 4, 2], &[4, 0, 2], &[2, 2, 0]]);
        let fns = brush(&m, &SlopeSchedule::naturals(2)).unwrap();
        assert_eq!(fns[2], fns[1].restrict_prefix(&rat(2, 1)).unwrap());
        assert_eq!(verify_embedding(&m, &fns).unwrap(), rat(0, 1));
    }

    #[test]
    fn verify_detects_perturbation() {
        let m = metric(&[&[0, 2, 3], &[2, 0, 3], &[3, 3, 0]]);
        let mut fns = brush(&m, &SlopeSchedule::naturals(2)).unwrap();
        // Extend one domain by 1/4: the max deviation is exactly 1/4.
        let longer = fns[1].concat(&PlFunction::linear(rat(7, 1), rat(1, 4)).unwrap());
        fns[1] = longer;
        assert_eq!(verify_embedding(&m, &fns).unwrap(), rat(1, 4));
    }

    #[test]
    fn schedule_validation() {
        assert!(SlopeSchedule::new(vec![rat(1, 2), rat(1, 1), rat(3, 1)]).is_ok());
        assert!(matches!(
            SlopeSchedule::new(vec![rat(1, 1), rat(1, 1)]),
            Err(MetricError::ScheduleNotIncreasing { index: 1 })
        ));
        let m = metric(&[&[0, 2, 3], &[2, 0, 3], &[3, 3, 0]]);
        assert!(matches!(
            brush(&m, &SlopeSchedule::naturals(1)),
            Err(MetricError::ScheduleTooShort { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn arbitrary_increasing_schedule_still_isometric() {
        let m = metric(&[&[0, 2, 3, 4], &[2, 0, 3, 4], &[3, 3, 0, 5], &[4, 4, 5, 0]]);
        m.certify().unwrap();
        let schedule =
            SlopeSchedule::new(vec![rat(-3, 2), rat(1, 7), rat(22, 7)]).unwrap();
        let fns = brush(&m, &schedule).unwrap();
        assert_eq!(verify_embedding(&m, &fns).unwrap(), rat(0, 1));
    }

    #[test]
    fn embed_discrete_examples() {
        let z = DiscreteFunction::zero(rat(1, 1)).unwrap();
        assert_eq!(
            embed_discrete(&z),
            PlFunction::linear(rat(0, 1), rat(1, 1)).unwrap()
        );

        let g = DiscreteFunction::new(rat(2, 1), vec![Knot::new(rat(1, 1), rat(1, 1))]).unwrap();
        assert_eq!(
            embed_discrete(&g),
            PlFunction::from_pairs(vec![
                (rat(0, 1), rat(0, 1)),
                (rat(1, 1), rat(0, 1)),
                (rat(2, 1), rat(1, 1)),
            ])
            .unwrap()
        );
    }

    #[test]
    fn embed_discrete_preserves_distance() {
        let g1 = DiscreteFunction::new(
            rat(3, 1),
            vec![Knot::new(rat(1, 2), rat(2, 1)), Knot::new(rat(2, 1), rat(-1, 1))],
        )
        .unwrap();
        let g2 = DiscreteFunction::new(
            rat(5, 2),
            vec![Knot::new(rat(1, 2), rat(2, 1)), Knot::new(rat(2, 1), rat(3, 1))],
        )
        .unwrap();
        assert_eq!(
            embed_discrete(&g1).distance(&embed_discrete(&g2)),
            g1.distance(&g2)
        );
        // Cancelling running sums after the branch must not fool the images:
        // slopes re-coincide later, values do not.
        let h1 = DiscreteFunction::new(
            rat(4, 1),
            vec![Knot::new(rat(1, 1), rat(1, 1)), Knot::new(rat(2, 1), rat(1, 1))],
        )
        .unwrap();
        let h2 = DiscreteFunction::new(
            rat(4, 1),
            vec![Knot::new(rat(1, 1), rat(2, 1))],
        )
        .unwrap();
        assert_eq!(
            embed_discrete(&h1).distance(&embed_discrete(&h2)),
            h1.distance(&h2)
        );
    }
}
