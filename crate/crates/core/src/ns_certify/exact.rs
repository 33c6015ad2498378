//! Exact revised simplex started from a given basis.
//!
//! Each step solves the basis systems from scratch by sparse rational
//! elimination, so a start basis that is already optimal costs two solves.

use num_traits::{Signed, Zero};

use super::simplex::{axpy, Relation, SimplexError, Solution, SparseRow, StandardLp};
use crate::rational::{self, Rational};

/// Solves the square system `rows x = rhs`; `None` if singular.
pub fn sparse_solve(mut rows: Vec<SparseRow<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rows.len();
    let mut active = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let r = (0..n).filter(|&i| active[i]).min_by_key(|&i| (rows[i].len(), i))?;
        let (c, piv) = rows[r].first().cloned()?;
        active[r] = false;
        let prow = std::mem::take(&mut rows[r]);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if let Ok(k) = rows[i].binary_search_by_key(&c, |e| e.0) {
                let f = &rows[i][k].1 / &piv;
                rows[i] = axpy(&rows[i], &f, &prow);
                let d = &f * &rhs[r];
                rhs[i] -= d;
            }
        }
        rows[r] = prow;
        order.push((r, c, piv));
    }
    let mut x = vec![Rational::zero(); n];
    for (r, c, piv) in order.into_iter().rev() {
        let mut v = rhs[r].clone();
        for (j, a) in &rows[r] {
            if *j != c {
                v -= a * &x[*j];
            }
        }
        x[c] = v / piv;
    }
    Some(x)
}

struct Columns {
    cols: Vec<SparseRow<Rational>>,
    rhs: Vec<Rational>,
    cost: Vec<Rational>,
    first_art: usize,
}

impl Columns {
    fn new(lp: &StandardLp) -> Self {
        let m = lp.rows.len();
        let num_slack = lp.rows.iter().filter(|r| r.relation == Relation::Le).count();
        let n = lp.num_vars;
        let mut cols: Vec<SparseRow<Rational>> = vec![Vec::new(); n + m];
        let (mut next_slack, mut next_art) = (n, n + num_slack);
        for (i, row) in lp.rows.iter().enumerate() {
            for (j, v) in &row.coeffs {
                if !v.is_zero() {
                    cols[*j].push((i, v.clone()));
                }
            }
            let unit = match row.relation {
                Relation::Le => {
                    next_slack += 1;
                    next_slack - 1
                }
                Relation::Eq => {
                    next_art += 1;
                    next_art - 1
                }
            };
            cols[unit].push((i, rational::int(1)));
        }
        let mut cost = vec![Rational::zero(); n + m];
        for (j, v) in &lp.objective {
            cost[*j] = v.clone();
        }
        Self {
            cols,
            rhs: lp.rows.iter().map(|r| r.rhs.clone()).collect(),
            cost,
            first_art: n + num_slack,
        }
    }

    /// Rows of the basis matrix `B` (or of `B^T`).
    fn basis_rows(&self, basis: &[usize], transpose: bool) -> Vec<SparseRow<Rational>> {
        let m = basis.len();
        let mut rows: Vec<SparseRow<Rational>> = vec![Vec::new(); m];
        for (k, &b) in basis.iter().enumerate() {
            for (i, v) in &self.cols[b] {
                if transpose {
                    rows[k].push((*i, v.clone()));
                } else {
                    rows[*i].push((k, v.clone()));
                }
            }
        }
        for r in &mut rows {
            r.sort_by_key(|e| e.0);
        }
        rows
    }
}

/// Primal simplex in exact arithmetic from `start`, a basis given as column
/// indices in the numbering of [`super::simplex::solve`]. Entering columns
/// follow Bland's rule. Fails with `Infeasible` if `start` is singular or
/// not primal feasible.
pub fn solve_from_basis(lp: &StandardLp, start: &[usize], limit: usize) -> Result<Solution<Rational>, SimplexError> {
    let data = Columns::new(lp);
    let m = lp.rows.len();
    let n = lp.num_vars;
    let mut basis = start.to_vec();
    let mut x = sparse_solve(data.basis_rows(&basis, false), data.rhs.clone()).ok_or(SimplexError::Infeasible)?;
    if x.iter().any(Signed::is_negative) {
        return Err(SimplexError::Infeasible);
    }
    let mut pivots = 0;
    loop {
        let cb: Vec<Rational> = basis.iter().map(|&b| data.cost[b].clone()).collect();
        let y = sparse_solve(data.basis_rows(&basis, true), cb).ok_or(SimplexError::Infeasible)?;
        let mut in_basis = vec![false; data.cols.len()];
        for &b in &basis {
            in_basis[b] = true;
        }
        let entering = (0..data.first_art).find(|&j| {
            if in_basis[j] {
                return false;
            }
            let mut d = data.cost[j].clone();
            for (i, v) in &data.cols[j] {
                d -= v * &y[*i];
            }
            d.is_positive()
        });
        let Some(q) = entering else {
            let mut primal = vec![Rational::zero(); n];
            let mut value = Rational::zero();
            for (k, &b) in basis.iter().enumerate() {
                if b < n {
                    primal[b] = x[k].clone();
                }
                value += &data.cost[b] * &x[k];
            }
            return Ok(Solution {
                value,
                primal,
                duals: y,
                pivots,
                basis,
            });
        };
        if pivots >= limit {
            return Err(SimplexError::IterationLimit(pivots));
        }
        let mut aq = vec![Rational::zero(); m];
        for (i, v) in &data.cols[q] {
            aq[*i] = v.clone();
        }
        let w = sparse_solve(data.basis_rows(&basis, false), aq).ok_or(SimplexError::Infeasible)?;
        let mut leave: Option<(usize, Rational)> = None;
        for k in 0..m {
            // a basic artificial sits at zero and may leave on either sign
            let ratio = if basis[k] >= data.first_art && !w[k].is_zero() {
                Rational::zero()
            } else if w[k].is_positive() {
                &x[k] / &w[k]
            } else {
                continue;
            };
            let better = match &leave {
                None => true,
                Some((bk, br)) => ratio < *br || (ratio == *br && basis[k] < basis[*bk]),
            };
            if better {
                leave = Some((k, ratio));
            }
        }
        let Some((r, step)) = leave else {
            return Err(SimplexError::Unbounded);
        };
        for k in 0..m {
            if !w[k].is_zero() {
                let d = &step * &w[k];
                x[k] -= d;
            }
        }
        x[r] = step;
        basis[r] = q;
        pivots += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn sparse_solve_small_system() {
        // 2x + y = 3, x + 3y = 5 -> (4/5, 7/5)
        let rows = vec![vec![(0, int(2)), (1, int(1))], vec![(0, int(1)), (1, int(3))]];
        let x = sparse_solve(rows, vec![int(3), int(5)]).unwrap();
        assert_eq!(x, vec![frac(4, 5), frac(7, 5)]);
        let singular = vec![vec![(0, int(1)), (1, int(1))], vec![(0, int(2)), (1, int(2))]];
        assert!(sparse_solve(singular, vec![int(1), int(2)]).is_none());
    }

    #[test]
    fn walks_from_slack_basis_to_optimum() {
        let row = |c: &[(usize, i64)], rhs| super::super::simplex::LpRow {
            coeffs: c.iter().map(|&(j, v)| (j, int(v))).collect(),
            relation: Relation::Le,
            rhs: int(rhs),
        };
        let lp = StandardLp {
            num_vars: 2,
            rows: vec![row(&[(0, 1), (1, 1)], 4), row(&[(0, 1), (1, 3)], 6), row(&[(0, 1)], 3)],
            objective: vec![(0, int(3)), (1, int(2))],
        };
        let s = solve_from_basis(&lp, &[2, 3, 4], 50).unwrap();
        assert_eq!(s.value, int(11));
        assert_eq!(s.duals, vec![int(2), int(0), int(1)]);
        // a start that is not primal feasible is refused
        assert_eq!(solve_from_basis(&lp, &[0, 3, 4], 50).unwrap_err(), SimplexError::Infeasible);
    }
}
