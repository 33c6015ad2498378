//! Dense `f64` tableau simplex used to find an optimal basis quickly.
//!
//! Right-hand sides are perturbed by `A eps` for a small random positive
//! `eps` (a shift of the lower bounds), which removes the heavy primal
//! degeneracy of the no-signaling rows. The true right-hand side is carried
//! alongside and restored at the end, followed by dual simplex cleanup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::simplex::{Relation, SimplexError, Solution, StandardLp};
use crate::rational;

const EPS: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
const PERTURB: f64 = 1e-6;
const PERTURB_SEED: u64 = 0x5eed_1296;

struct Dense {
    m: usize,
    ncols: usize,
    a: Vec<f64>,
    /// Perturbed right-hand side, the one pivoting steers by.
    rp: Vec<f64>,
    /// True right-hand side transformed alongside.
    rt: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    value: f64,
    pivots: usize,
}

impl Dense {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.ncols + j]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let inv = 1.0 / self.at(r, q);
        for v in &mut self.a[r * nc..(r + 1) * nc] {
            *v *= inv;
        }
        self.rp[r] *= inv;
        self.rt[r] *= inv;
        let prow = self.a[r * nc..(r + 1) * nc].to_vec();
        let nz: Vec<usize> = (0..nc).filter(|&j| prow[j] != 0.0).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * nc..(i + 1) * nc];
            for &j in &nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < 1e-13 { 0.0 } else { v };
            }
            row[q] = 0.0;
            self.rp[i] -= f * self.rp[r];
            self.rt[i] -= f * self.rt[r];
        }
        let c = self.reduced[q];
        if c != 0.0 {
            for &j in &nz {
                self.reduced[j] -= c * prow[j];
            }
            self.value += c * self.rp[r];
        }
        self.reduced[q] = 0.0;
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Largest-coefficient pricing; ratio ties go to the larger pivot.
    fn primal(&mut self, allowed: &dyn Fn(usize) -> bool, limit: usize) -> Result<(), SimplexError> {
        loop {
            if self.pivots >= limit {
                return Err(SimplexError::IterationLimit(self.pivots));
            }
            let mut q = None;
            let mut best = EPS;
            for j in 0..self.ncols {
                if allowed(j) && self.reduced[j] > best {
                    best = self.reduced[j];
                    q = Some(j);
                }
            }
            let Some(q) = q else { return Ok(()) };
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rp[i].max(0.0) / a;
                leave = match leave {
                    Some((_, br, ba)) if ratio > br + 1e-12 || (ratio > br - 1e-12 && a <= ba) => leave,
                    _ => Some((i, ratio, a)),
                };
            }
            match leave {
                Some((r, _, _)) => self.pivot(r, q),
                None => return Err(SimplexError::Unbounded),
            }
        }
    }

    /// Dual simplex on the true right-hand side from a dual feasible basis.
    fn dual(&mut self, allowed: &dyn Fn(usize) -> bool, limit: usize) -> Result<(), SimplexError> {
        loop {
            if self.pivots >= limit {
                return Err(SimplexError::IterationLimit(self.pivots));
            }
            let mut r = None;
            let mut worst = -EPS;
            for i in 0..self.m {
                if self.rt[i] < worst {
                    worst = self.rt[i];
                    r = Some(i);
                }
            }
            let Some(r) = r else { return Ok(()) };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.ncols {
                let a = self.at(r, j);
                if !allowed(j) || a >= -PIVOT_TOL {
                    continue;
                }
                let ratio = self.reduced[j].min(0.0) / a;
                if enter.is_none_or(|(_, br)| ratio < br - 1e-12) {
                    enter = Some((j, ratio));
                }
            }
            match enter {
                Some((q, _)) => self.pivot(r, q),
                None => return Err(SimplexError::Infeasible),
            }
        }
    }
}

/// Solves `lp` in floating point. Column numbering matches
/// [`super::simplex::solve`].
pub fn solve_f64(lp: &StandardLp, limit: usize) -> Result<Solution<f64>, SimplexError> {
    let m = lp.rows.len();
    let n = lp.num_vars;
    let num_slack = lp.rows.iter().filter(|r| r.relation == Relation::Le).count();
    let ncols = n + num_slack + (m - num_slack);
    let is_art = |j: usize| j >= n + num_slack;

    let mut rng = ChaCha20Rng::seed_from_u64(PERTURB_SEED);
    let shift: Vec<f64> = (0..n + num_slack)
        .map(|_| PERTURB * (1.0 + rng.gen::<f64>()))
        .collect();

    let mut a = vec![0.0; m * ncols];
    let mut rp = vec![0.0; m];
    let mut rt = vec![0.0; m];
    let mut basis = vec![0; m];
    let mut sign = vec![1.0; m];
    let (mut next_slack, mut next_art) = (n, n + num_slack);
    for (i, row) in lp.rows.iter().enumerate() {
        let b = rational::to_f64(&row.rhs);
        let mut pert = b;
        for (j, v) in &row.coeffs {
            let v = rational::to_f64(v);
            a[i * ncols + j] = v;
            pert += v * shift[*j];
        }
        match row.relation {
            Relation::Le => {
                a[i * ncols + next_slack] = 1.0;
                pert += shift[next_slack];
                if pert < 0.0 {
                    return Err(SimplexError::NegativeRhs(i));
                }
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Eq => {
                if pert < 0.0 {
                    sign[i] = -1.0;
                    for v in &mut a[i * ncols..(i + 1) * ncols] {
                        *v = -*v;
                    }
                }
                a[i * ncols + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
        rp[i] = sign[i] * pert;
        rt[i] = sign[i] * b;
    }
    let unit_col = basis.clone();

    let mut reduced = vec![0.0; ncols];
    let mut value = 0.0;
    for i in 0..m {
        if is_art(basis[i]) {
            for j in 0..n + num_slack {
                reduced[j] += a[i * ncols + j];
            }
            value -= rp[i];
        }
    }
    let mut t = Dense {
        m,
        ncols,
        a,
        rp,
        rt,
        basis,
        reduced,
        value,
        pivots: 0,
    };
    t.primal(&|j| !is_art(j), limit)?;
    if t.value < -1e-7 {
        return Err(SimplexError::Infeasible);
    }
    for i in 0..m {
        if !is_art(t.basis[i]) {
            continue;
        }
        let q = (0..n + num_slack)
            .filter(|&j| t.at(i, j).abs() > PIVOT_TOL)
            .max_by(|&x, &y| t.at(i, x).abs().total_cmp(&t.at(i, y).abs()));
        if let Some(q) = q {
            t.pivot(i, q);
        }
    }

    let mut cost = vec![0.0; ncols];
    for (j, v) in &lp.objective {
        cost[*j] = rational::to_f64(v);
    }
    let mut reduced = cost.clone();
    let mut value = 0.0;
    for i in 0..m {
        let cb = cost[t.basis[i]];
        if cb != 0.0 {
            for j in 0..ncols {
                reduced[j] -= cb * t.at(i, j);
            }
            value += cb * t.rp[i];
        }
    }
    for i in 0..m {
        reduced[t.basis[i]] = 0.0;
    }
    t.reduced = reduced;
    t.value = value;
    t.primal(&|j| !is_art(j), limit)?;

    // drop the perturbation and repair any primal infeasibility it hid
    t.rp = t.rt.clone();
    t.dual(&|j| !is_art(j), limit)?;
    t.primal(&|j| !is_art(j), limit)?;

    let mut primal = vec![0.0; n];
    let mut value = 0.0;
    for i in 0..m {
        let b = t.basis[i];
        if b < n {
            primal[b] = t.rt[i].max(0.0);
        }
        value += cost[b] * t.rt[i];
    }
    let duals = (0..m)
        .map(|i| sign[i] * (cost[unit_col[i]] - t.reduced[unit_col[i]]))
        .collect();
    Ok(Solution {
        value,
        primal,
        duals,
        pivots: t.pivots,
        basis: t.basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ns_certify::simplex::LpRow;
    use crate::rational::int;

    #[test]
    fn textbook_lp() {
        let row = |c: &[(usize, i64)], rhs| LpRow {
            coeffs: c.iter().map(|&(j, v)| (j, int(v))).collect(),
            relation: Relation::Le,
            rhs: int(rhs),
        };
        let lp = StandardLp {
            num_vars: 2,
            rows: vec![row(&[(0, 1), (1, 1)], 4), row(&[(0, 1), (1, 3)], 6), row(&[(0, 1)], 3)],
            objective: vec![(0, int(3)), (1, int(2))],
        };
        let s = solve_f64(&lp, 100).unwrap();
        assert!((s.value - 11.0).abs() < 1e-9);
        assert!((s.duals[0] - 2.0).abs() < 1e-9 && s.duals[1].abs() < 1e-9);
    }

    #[test]
    fn degenerate_equalities() {
        // x - y = 0, x + y + z = 1, max x  -> 1/2
        let lp = StandardLp {
            num_vars: 3,
            rows: vec![
                LpRow {
                    coeffs: vec![(0, int(1)), (1, int(-1))],
                    relation: Relation::Eq,
                    rhs: int(0),
                },
                LpRow {
                    coeffs: vec![(0, int(1)), (1, int(1)), (2, int(1))],
                    relation: Relation::Eq,
                    rhs: int(1),
                },
            ],
            objective: vec![(0, int(1))],
        };
        let s = solve_f64(&lp, 100).unwrap();
        assert!((s.value - 0.5).abs() < 1e-9);
        assert!((s.primal[0] - 0.5).abs() < 1e-9 && s.primal[2].abs() < 1e-9);
    }
}
