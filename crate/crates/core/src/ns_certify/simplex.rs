//! Two-phase tableau simplex, generic over the number type so the same
//! pivoting code runs in `f64` and in exact rationals.
//!
//! Rows are kept sparse (sorted `(column, value)` lists); the reduced-cost
//! row is dense. Artificial columns stay in the tableau through phase 2 so
//! the optimal dual vector can be read off their reduced costs.

use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn nil(&self) -> bool;
    fn gt0(&self) -> bool;
    fn lt0(&self) -> bool;
    /// `self < o`, with whatever slack the representation needs.
    fn less(&self, o: &Self) -> bool;
    fn approx_eq(&self, o: &Self) -> bool;
    fn to_f64(&self) -> f64;
}

const FLOAT_EPS: f64 = 1e-9;
const FLOAT_DROP: f64 = 1e-12;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn nil(&self) -> bool {
        self.abs() <= FLOAT_DROP
    }
    fn gt0(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn lt0(&self) -> bool {
        *self < -FLOAT_EPS
    }
    fn less(&self, o: &Self) -> bool {
        *self < o - FLOAT_DROP
    }
    fn approx_eq(&self, o: &Self) -> bool {
        (self - o).abs() <= FLOAT_DROP
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn nil(&self) -> bool {
        <Self as Zero>::is_zero(self)
    }
    fn gt0(&self) -> bool {
        <Self as Signed>::is_positive(self)
    }
    fn lt0(&self) -> bool {
        <Self as Signed>::is_negative(self)
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
    fn approx_eq(&self, o: &Self) -> bool {
        self == o
    }
    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
}

/// `maximize c.x  s.t.  rows, x >= 0`, all right-hand sides nonnegative.
#[derive(Clone, Debug)]
pub struct StandardLp {
    pub num_vars: usize,
    pub rows: Vec<LpRow>,
    pub objective: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub value: T,
    pub primal: Vec<T>,
    /// One multiplier per row; nonnegative on `Le` rows.
    pub duals: Vec<T>,
    pub pivots: usize,
    /// Final basis as column indices (structural columns first, then one
    /// slack per `Le` row, then one artificial per `Eq` row).
    pub basis: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplexError {
    Infeasible,
    Unbounded,
    IterationLimit(usize),
    NegativeRhs(usize),
}

impl std::fmt::Display for SimplexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Infeasible => write!(f, "infeasible"),
            Self::Unbounded => write!(f, "unbounded"),
            Self::IterationLimit(n) => write!(f, "no convergence after {n} pivots"),
            Self::NegativeRhs(r) => write!(f, "row {r} has a negative right-hand side"),
        }
    }
}

pub(super) type SparseRow<T> = Vec<(usize, T)>;

pub(super) fn get<T: Scalar>(row: &SparseRow<T>, col: usize) -> Option<&T> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

/// `a - f * b` on sparse rows.
pub(super) fn axpy<T: Scalar>(a: &SparseRow<T>, f: &T, b: &SparseRow<T>) -> SparseRow<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            let v = f.mul(&b[j].1).negate();
            if !v.nil() {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = a[i].1.sub(&f.mul(&b[j].1));
            if !v.nil() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Tableau<T> {
    rows: Vec<SparseRow<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    reduced: Vec<T>,
    value: T,
    ncols: usize,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, q: usize) {
        let piv = get(&self.rows[r], q).expect("pivot on a zero entry").clone();
        let inv = T::one().div(&piv);
        for e in self.rows[r].iter_mut() {
            e.1 = e.1.mul(&inv);
        }
        self.rhs[r] = self.rhs[r].mul(&inv);
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(a) = get(&self.rows[i], q).cloned() {
                self.rows[i] = axpy(&self.rows[i], &a, &prow);
                self.rhs[i] = self.rhs[i].sub(&a.mul(&prhs));
                if self.rhs[i].nil() {
                    self.rhs[i] = T::zero();
                }
            }
        }
        let c = self.reduced[q].clone();
        if !c.nil() {
            for (j, v) in &prow {
                self.reduced[*j] = self.reduced[*j].sub(&c.mul(v));
            }
            self.value = self.value.add(&c.mul(&prhs));
        }
        self.reduced[q] = T::zero();
        self.rows[r] = prow;
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Pivots until no allowed column has a positive reduced cost.
    ///
    /// Entering columns are priced by largest reduced cost; after a run of
    /// degenerate pivots the rule drops to Bland's smallest-index choice
    /// until the objective moves again, which rules out cycling.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool, limit: usize) -> Result<(), SimplexError> {
        const DEGENERATE_RUN: usize = 50;
        let mut degenerate_run = 0usize;
        loop {
            if self.pivots >= limit {
                return Err(SimplexError::IterationLimit(self.pivots));
            }
            let bland = degenerate_run >= DEGENERATE_RUN;
            let mut entering: Option<usize> = None;
            for j in 0..self.ncols {
                if !allowed(j) || !self.reduced[j].gt0() {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if entering.is_none_or(|e| self.reduced[e].less(&self.reduced[j])) {
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let Some(a) = get(&self.rows[i], q) else { continue };
                if !a.gt0() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio.less(&br) || (ratio.approx_eq(&br) && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                Some((r, ratio)) => {
                    if ratio.nil() {
                        degenerate_run += 1;
                    } else {
                        degenerate_run = 0;
                    }
                    self.pivot(r, q)
                }
                None => return Err(SimplexError::Unbounded),
            }
        }
    }
}

/// Solves `lp` with the two-phase method.
pub fn solve<T: Scalar>(lp: &StandardLp, limit: usize) -> Result<Solution<T>, SimplexError> {
    let m = lp.rows.len();
    let n = lp.num_vars;
    let num_slack = lp.rows.iter().filter(|r| r.relation == Relation::Le).count();
    let num_art = m - num_slack;
    let ncols = n + num_slack + num_art;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    // column that started basic in each row; its reduced cost yields the dual
    let mut unit_col = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n, n + num_slack);
    for (i, row) in lp.rows.iter().enumerate() {
        if Signed::is_negative(&row.rhs) {
            return Err(SimplexError::NegativeRhs(i));
        }
        let mut coeffs: SparseRow<T> = row
            .coeffs
            .iter()
            .filter(|(_, v)| !Zero::is_zero(v))
            .map(|(j, v)| (*j, T::from_rational(v)))
            .collect();
        coeffs.sort_by_key(|e| e.0);
        let col = match row.relation {
            Relation::Le => {
                next_slack += 1;
                next_slack - 1
            }
            Relation::Eq => {
                next_art += 1;
                next_art - 1
            }
        };
        coeffs.push((col, T::one()));
        rows.push(coeffs);
        rhs.push(T::from_rational(&row.rhs));
        basis.push(col);
        unit_col.push(col);
    }
    let is_art = |j: usize| j >= n + num_slack;

    // phase 1: maximize -(sum of artificials)
    let mut reduced = vec![T::zero(); ncols];
    let mut value = T::zero();
    for i in 0..m {
        if is_art(basis[i]) {
            for (j, v) in &rows[i] {
                if !is_art(*j) {
                    reduced[*j] = reduced[*j].add(v);
                }
            }
            value = value.sub(&rhs[i]);
        }
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        reduced,
        value,
        ncols,
        pivots: 0,
    };
    t.optimize(&|j| !is_art(j), limit)?;
    if t.value.lt0() {
        return Err(SimplexError::Infeasible);
    }
    // drive zero-level artificials out of the basis where possible
    for i in 0..m {
        if is_art(t.basis[i]) {
            if let Some(q) = t.rows[i].iter().find(|(j, _)| !is_art(*j)).map(|e| e.0) {
                t.pivot(i, q);
            }
        }
    }

    // phase 2
    let mut cost = vec![T::zero(); ncols];
    for (j, v) in &lp.objective {
        cost[*j] = T::from_rational(v);
    }
    let mut reduced = cost.clone();
    let mut value = T::zero();
    for i in 0..m {
        let cb = &cost[t.basis[i]];
        if !cb.nil() {
            for (j, v) in &t.rows[i] {
                reduced[*j] = reduced[*j].sub(&cb.mul(v));
            }
            value = value.add(&cb.mul(&t.rhs[i]));
        }
    }
    for i in 0..m {
        reduced[t.basis[i]] = T::zero();
    }
    t.reduced = reduced;
    t.value = value;
    t.optimize(&|j| !is_art(j), limit)?;

    let mut primal = vec![T::zero(); n];
    for i in 0..m {
        if t.basis[i] < n {
            primal[t.basis[i]] = t.rhs[i].clone();
        }
    }
    let duals = unit_col
        .iter()
        .map(|&c| cost[c].sub(&t.reduced[c]))
        .collect();
    Ok(Solution {
        value: t.value,
        primal,
        duals,
        pivots: t.pivots,
        basis: t.basis,
    })
}
