//! Linear-programming certification of partial randomness over the
//! no-signaling polytope.
//!
//! The program maximizes (or minimizes) one entry `P(x|u)` over all
//! no-signaling behaviors whose raw Bell value `B . P` is at most `delta_tilde`.
//! Optimal dual multipliers are read from the final simplex basis and
//! checked independently of the solver in exact arithmetic.

mod dense;
mod exact;
pub mod simplex;

pub use dense::solve_f64;
pub use exact::{solve_from_basis, sparse_solve};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::boxes::Behavior;
use crate::error::{invalid, Error, Result};
use crate::ks_bell::{
    entry_from_index, entry_index, BellFunctional, OutcomePair, SettingPair, NUM_ENTRIES,
    NUM_OUTCOMES, NUM_SETTINGS,
};
use crate::rational::{self, Rational};
use simplex::{LpRow, Relation, SimplexError, StandardLp};

pub const NUM_NORMALIZATION_ROWS: usize = 81;
pub const NUM_SIGNALING_ROWS_PER_PARTY: usize = NUM_SETTINGS * NUM_OUTCOMES * (NUM_SETTINGS - 1);
pub const NUM_EQUALITY_ROWS: usize = NUM_NORMALIZATION_ROWS + 2 * NUM_SIGNALING_ROWS_PER_PARTY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// What an equality row encodes; used for labels in certificate files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowLabel {
    /// `sum_x P(x|u) = 1`.
    Normalization { u: SettingPair },
    /// Alice's marginal of `x1` at `(u1, u2)` equals the one at `(u1, 1)`.
    AliceSignaling { u1: u8, x1: u8, u2: u8 },
    /// Bob's marginal of `x2` at `(u1, u2)` equals the one at `(1, u2)`.
    BobSignaling { u2: u8, x2: u8, u1: u8 },
}

/// The certification LP over the 1296 entries of a behavior.
#[derive(Clone, Debug)]
pub struct LpProblem {
    /// Equality rows (coefficients in {-1, 0, 1}) with right-hand sides 0 or 1.
    pub equalities: Vec<(RowLabel, Vec<(usize, i8)>, Rational)>,
    /// Entries of the Bell cap row `B . P <= delta_tilde`.
    pub bell_row: Vec<usize>,
    pub delta_tilde: Rational,
    pub target: (OutcomePair, SettingPair),
    pub sense: Sense,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        NUM_ENTRIES
    }

    /// Objective coefficient of variable `j` (in the maximization form).
    pub fn objective_coefficient(&self, j: usize) -> i8 {
        if j == entry_index(self.target.0, self.target.1) {
            match self.sense {
                Sense::Maximize => 1,
                Sense::Minimize => -1,
            }
        } else {
            0
        }
    }

    fn to_standard(&self) -> StandardLp {
        let mut rows: Vec<LpRow> = self
            .equalities
            .iter()
            .map(|(_, coeffs, rhs)| LpRow {
                coeffs: coeffs.iter().map(|&(j, v)| (j, rational::int(v as i64))).collect(),
                relation: Relation::Eq,
                rhs: rhs.clone(),
            })
            .collect();
        rows.push(LpRow {
            coeffs: self.bell_row.iter().map(|&j| (j, rational::int(1))).collect(),
            relation: Relation::Le,
            rhs: self.delta_tilde.clone(),
        });
        let t = entry_index(self.target.0, self.target.1);
        StandardLp {
            num_vars: NUM_ENTRIES,
            rows,
            objective: vec![(t, rational::int(self.objective_coefficient(t) as i64))],
        }
    }
}

/// Builds the program. No-signaling is encoded pairwise against the other
/// party's setting 1, giving 9 * 4 * 8 rows per party.
pub fn build_lp(
    f: &BellFunctional,
    delta_tilde: Rational,
    target: (OutcomePair, SettingPair),
    sense: Sense,
) -> Result<LpProblem> {
    if delta_tilde.is_negative() {
        return Err(invalid("Bell cap must be nonnegative"));
    }
    let mut equalities = Vec::with_capacity(NUM_EQUALITY_ROWS);
    for u in SettingPair::all() {
        let coeffs = OutcomePair::all().map(|x| (entry_index(x, u), 1i8)).collect();
        equalities.push((RowLabel::Normalization { u }, coeffs, rational::int(1)));
    }
    let n = NUM_SETTINGS as u8;
    let o = NUM_OUTCOMES as u8;
    for u1 in 1..=n {
        for x1 in 1..=o {
            for u2 in 2..=n {
                let mut coeffs = Vec::with_capacity(2 * NUM_OUTCOMES);
                for x2 in 1..=o {
                    coeffs.push((entry_index(OutcomePair::new(x1, x2), SettingPair::new(u1, u2)), 1i8));
                    coeffs.push((entry_index(OutcomePair::new(x1, x2), SettingPair::new(u1, 1)), -1i8));
                }
                equalities.push((RowLabel::AliceSignaling { u1, x1, u2 }, coeffs, rational::int(0)));
            }
        }
    }
    for u2 in 1..=n {
        for x2 in 1..=o {
            for u1 in 2..=n {
                let mut coeffs = Vec::with_capacity(2 * NUM_OUTCOMES);
                for x1 in 1..=o {
                    coeffs.push((entry_index(OutcomePair::new(x1, x2), SettingPair::new(u1, u2)), 1i8));
                    coeffs.push((entry_index(OutcomePair::new(x1, x2), SettingPair::new(1, u2)), -1i8));
                }
                equalities.push((RowLabel::BobSignaling { u2, x2, u1 }, coeffs, rational::int(0)));
            }
        }
    }
    let bell_row = f.sb().iter().map(|&(x, u)| entry_index(x, u)).collect();
    Ok(LpProblem {
        equalities,
        bell_row,
        delta_tilde,
        target,
        sense,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Floating point, falling back to exact arithmetic on numeric trouble.
    Float,
    /// Exact rational arithmetic throughout.
    Exact,
}

/// Dual multipliers for the maximization form of an [`LpProblem`]:
/// `A_eq^T y + z * bell - s = c` with `z >= 0`, `s >= 0`, certifying
/// `c . P <= b_eq . y + delta_tilde * z` for every feasible `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub equality: Vec<Rational>,
    pub bell: Rational,
    pub positivity: Vec<Rational>,
    pub bound: Rational,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Optimum of `P(target)` (not of the internal maximization form).
    pub optimum: Rational,
    pub optimum_f64: f64,
    pub primal: Behavior,
    pub exact_primal: Option<Vec<Rational>>,
    pub dual: DualCertificate,
    pub mode: SolveMode,
    pub pivots: usize,
}

const PIVOT_LIMIT: usize = 200_000;

pub fn solve_lp(p: &LpProblem, mode: SolveMode) -> Result<LpSolution> {
    match mode {
        SolveMode::Exact => solve_exact(p),
        SolveMode::Float => match solve_float(p) {
            Ok(s) => Ok(s),
            Err(_) => solve_exact(p),
        },
    }
}

fn solver_error(e: SimplexError) -> Error {
    Error::Solver(e.to_string())
}

fn certificate_from_duals(p: &LpProblem, duals: &[Rational]) -> DualCertificate {
    let equality = duals[..p.equalities.len()].to_vec();
    let bell = duals[p.equalities.len()].clone();
    let positivity = positivity_multipliers(p, &equality, &bell);
    let mut cert = DualCertificate {
        equality,
        bell,
        positivity,
        bound: rational::int(0),
    };
    cert.bound = certificate_value(p, &cert);
    cert
}

/// `s = A_eq^T y + z * bell - c`.
fn positivity_multipliers(p: &LpProblem, y: &[Rational], z: &Rational) -> Vec<Rational> {
    let mut s = vec![rational::int(0); NUM_ENTRIES];
    for ((_, coeffs, _), yi) in p.equalities.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for &(j, a) in coeffs {
            s[j] += yi * rational::int(a as i64);
        }
    }
    for &j in &p.bell_row {
        s[j] += z;
    }
    for (j, sj) in s.iter_mut().enumerate() {
        *sj -= rational::int(p.objective_coefficient(j) as i64);
    }
    s
}

/// `b_eq . y + delta_tilde * z`.
fn certificate_value(p: &LpProblem, d: &DualCertificate) -> Rational {
    let mut v: Rational = p
        .equalities
        .iter()
        .zip(&d.equality)
        .map(|((_, _, b), y)| b * y)
        .sum();
    v += &p.delta_tilde * &d.bell;
    v
}

/// Exact solve. A floating-point pass supplies the start basis; the exact
/// revised simplex then proves it optimal or pivots on from it. Without a
/// usable start basis the exact tableau runs from scratch.
fn solve_exact(p: &LpProblem) -> Result<LpSolution> {
    let lp = p.to_standard();
    let warm = dense::solve_f64(&lp, PIVOT_LIMIT)
        .ok()
        .and_then(|f| exact::solve_from_basis(&lp, &f.basis, PIVOT_LIMIT).ok().map(|mut s| {
            s.pivots += f.pivots;
            s
        }));
    let s = match warm {
        Some(s) => s,
        None => simplex::solve::<Rational>(&lp, PIVOT_LIMIT).map_err(solver_error)?,
    };
    let dual = certificate_from_duals(p, &s.duals);
    if !verify_certificate(p, &dual) || dual.bound != s.value {
        return Err(Error::Solver("exact dual certificate failed verification".into()));
    }
    let optimum = match p.sense {
        Sense::Maximize => s.value.clone(),
        Sense::Minimize => -s.value.clone(),
    };
    let primal = Behavior::from_table(s.primal.iter().map(rational::to_f64).collect(), 1e-12)?;
    Ok(LpSolution {
        optimum_f64: rational::to_f64(&optimum),
        optimum,
        primal,
        exact_primal: Some(s.primal),
        dual,
        mode: SolveMode::Exact,
        pivots: s.pivots,
    })
}

fn solve_float(p: &LpProblem) -> Result<LpSolution> {
    let s = dense::solve_f64(&p.to_standard(), PIVOT_LIMIT).map_err(solver_error)?;
    // snap the float duals to nearby small-denominator rationals and keep
    // them only if they form an exactly valid certificate
    let duals: Vec<Rational> = s.duals.iter().map(|&v| snap(v)).collect();
    let dual = certificate_from_duals(p, &duals);
    if !verify_certificate(p, &dual) {
        return Err(Error::Solver("float duals do not snap to a valid certificate".into()));
    }
    let table: Vec<f64> = s.primal.iter().map(|&v| v.max(0.0)).collect();
    let primal = Behavior::from_table(table, 1e-9)?;
    let value = s.value;
    let bound_f64 = rational::to_f64(&dual.bound);
    if (bound_f64 - value).abs() > 1e-7 {
        return Err(Error::Solver("float primal and dual values disagree".into()));
    }
    let optimum = match p.sense {
        Sense::Maximize => dual.bound.clone(),
        Sense::Minimize => -dual.bound.clone(),
    };
    Ok(LpSolution {
        optimum_f64: match p.sense {
            Sense::Maximize => value,
            Sense::Minimize => -value,
        },
        optimum,
        primal,
        exact_primal: None,
        dual,
        mode: SolveMode::Float,
        pivots: s.pivots,
    })
}

/// Exact optimal primal of the zero-cap program for the standard target,
/// maximizing or minimizing `P(x*|u*)`: a no-signaling box with Bell value
/// 0 that an adversarial device can play. Solved once per process.
pub fn attack_box(sense: Sense) -> Result<Behavior> {
    use std::sync::OnceLock;
    static MAX: OnceLock<std::result::Result<Behavior, String>> = OnceLock::new();
    static MIN: OnceLock<std::result::Result<Behavior, String>> = OnceLock::new();
    let cell = match sense {
        Sense::Maximize => &MAX,
        Sense::Minimize => &MIN,
    };
    cell.get_or_init(|| {
        let f = crate::ks_bell::build_bell_functional(&crate::ks_bell::build_ks_model());
        let target = (crate::ks_bell::TARGET_OUTCOME, crate::ks_bell::TARGET_SETTING);
        build_lp(&f, rational::int(0), target, sense)
            .and_then(|p| solve_exact(&p))
            .map(|s| s.primal)
            .map_err(|e| e.to_string())
    })
    .clone()
    .map_err(Error::Solver)
}

/// Nearest rational with denominator at most 2^12, via continued fractions.
fn snap(v: f64) -> Rational {
    const MAX_DEN: i64 = 4096;
    if v.abs() < 1e-12 {
        return rational::int(0);
    }
    let sign = if v < 0.0 { -1 } else { 1 };
    let mut x = v.abs();
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    loop {
        let a = x.floor();
        let ai = a as i64;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > MAX_DEN {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let rem = x - a;
        if rem < 1e-12 {
            break;
        }
        x = 1.0 / rem;
    }
    rational::frac(sign * h1, k1)
}

/// Exact check that `d` is dual feasible for `p` and that its value does
/// not exceed the claimed bound. Independent of the solver.
pub fn verify_certificate(p: &LpProblem, d: &DualCertificate) -> bool {
    if d.equality.len() != p.equalities.len() || d.positivity.len() != NUM_ENTRIES {
        return false;
    }
    if d.bell.is_negative() || d.positivity.iter().any(Signed::is_negative) {
        return false;
    }
    let mut lhs = vec![rational::int(0); NUM_ENTRIES];
    for ((_, coeffs, _), y) in p.equalities.iter().zip(&d.equality) {
        for &(j, a) in coeffs {
            lhs[j] += y * rational::int(a as i64);
        }
    }
    for &j in &p.bell_row {
        lhs[j] += &d.bell;
    }
    for (j, s) in d.positivity.iter().enumerate() {
        lhs[j] -= s;
    }
    let feasible = lhs
        .iter()
        .enumerate()
        .all(|(j, v)| *v == rational::int(p.objective_coefficient(j) as i64));
    feasible && certificate_value(p, d) <= d.bound
}

/// Upper bound on `P(x*|u*)` for a box whose SV-weighted Bell value is at
/// most `delta`: `min(1, (3 + 2 delta / (1/2 - eps)^8) / 4)`.
///
/// Only the lower side `nu(u) >= (1/2 - eps)^8` of the SV setting measure
/// enters, which holds for any surjective bits-to-settings map.
pub fn randomness_bound(delta: f64, eps: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) {
        return Err(invalid(format!("epsilon {eps} outside [0, 1/2)")));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta {delta} must be finite and nonnegative")));
    }
    let delta_tilde = delta / (0.5 - eps).powi(8);
    Ok(((3.0 + 2.0 * delta_tilde) / 4.0).min(1.0))
}

/// Exact value of the bound `(3 + 2 delta_tilde) / 4` capped at 1.
pub fn lp_bound_formula(delta_tilde: &Rational) -> Rational {
    let v = (rational::int(3) + rational::int(2) * delta_tilde) / rational::int(4);
    v.min(rational::int(1))
}

/// Certificate file: `{delta_tilde, bound, multipliers}` with exact rationals as strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub version: u32,
    pub delta_tilde: String,
    pub target: (OutcomePair, SettingPair),
    pub sense: Sense,
    pub bound: String,
    pub multipliers: CertificateMultipliers,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateMultipliers {
    pub bell: String,
    /// Nonzero equality-row multipliers.
    pub equality: Vec<EqualityMultiplier>,
    /// Nonzero positivity multipliers keyed by entry.
    pub positivity: Vec<PositivityMultiplier>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityMultiplier {
    pub row: usize,
    pub label: RowLabel,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityMultiplier {
    pub x: OutcomePair,
    pub u: SettingPair,
    pub value: String,
}

pub const CERTIFICATE_VERSION: u32 = 1;

impl DualCertificate {
    pub fn to_json(&self, p: &LpProblem) -> CertificateJson {
        let equality = self
            .equality
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(row, v)| EqualityMultiplier {
                row,
                label: p.equalities[row].0,
                value: rational::to_string(v),
            })
            .collect();
        let positivity = self
            .positivity
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| {
                let (x, u) = entry_from_index(j);
                PositivityMultiplier {
                    x,
                    u,
                    value: rational::to_string(v),
                }
            })
            .collect();
        CertificateJson {
            version: CERTIFICATE_VERSION,
            delta_tilde: rational::to_string(&p.delta_tilde),
            target: p.target,
            sense: p.sense,
            bound: rational::to_string(&self.bound),
            multipliers: CertificateMultipliers {
                bell: rational::to_string(&self.bell),
                equality,
                positivity,
            },
        }
    }

    pub fn from_json(j: &CertificateJson, num_equalities: usize) -> Result<Self> {
        let parse = |s: &str, at: &str| {
            rational::parse_decimal(s).map_err(|e| Error::Format {
                location: at.to_string(),
                message: e.to_string(),
            })
        };
        let mut equality = vec![rational::int(0); num_equalities];
        for (k, m) in j.multipliers.equality.iter().enumerate() {
            if m.row >= num_equalities {
                return Err(Error::Format {
                    location: format!("multipliers.equality[{k}]"),
                    message: format!("row {} out of range", m.row),
                });
            }
            equality[m.row] = parse(&m.value, &format!("multipliers.equality[{k}]"))?;
        }
        let mut positivity = vec![rational::int(0); NUM_ENTRIES];
        for (k, m) in j.multipliers.positivity.iter().enumerate() {
            positivity[entry_index(m.x, m.u)] = parse(&m.value, &format!("multipliers.positivity[{k}]"))?;
        }
        Ok(Self {
            equality,
            bell: parse(&j.multipliers.bell, "multipliers.bell")?,
            positivity,
            bound: parse(&j.bound, "bound")?,
        })
    }
}

/// Rounds a [`Scalar`] slice to `f64`; handy for reporting.
pub fn to_f64_vec<T: simplex::Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(simplex::Scalar::to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ks_bell::{build_bell_functional, build_ks_model, TARGET_OUTCOME, TARGET_SETTING};

    fn problem(dt: Rational) -> LpProblem {
        let f = build_bell_functional(&build_ks_model());
        build_lp(&f, dt, (TARGET_OUTCOME, TARGET_SETTING), Sense::Maximize).unwrap()
    }

    #[test]
    fn problem_dimensions() {
        let p = problem(rational::int(0));
        assert_eq!(p.num_vars(), 1296);
        assert_eq!(p.equalities.len(), 657);
        assert_eq!(p.bell_row.len(), 504);
        for (_, coeffs, _) in &p.equalities {
            assert!(coeffs.iter().all(|&(_, a)| a == 1 || a == -1));
        }
    }

    #[test]
    fn negative_cap_rejected() {
        let f = build_bell_functional(&build_ks_model());
        assert!(build_lp(&f, rational::int(-1), (TARGET_OUTCOME, TARGET_SETTING), Sense::Maximize).is_err());
    }

    #[test]
    fn ideal_box_is_feasible_at_zero_cap() {
        let m = build_ks_model();
        let q = crate::boxes::ideal_quantum_box_exact(&m);
        let p = problem(rational::int(0));
        for (_, coeffs, rhs) in &p.equalities {
            let lhs: Rational = coeffs
                .iter()
                .map(|&(j, a)| &q.table()[j] * rational::int(a as i64))
                .sum();
            assert_eq!(&lhs, rhs);
        }
        let bell: Rational = p.bell_row.iter().map(|&j| q.table()[j].clone()).sum();
        assert!(bell.is_zero());
    }

    #[test]
    fn zero_certificate_fails() {
        let p = problem(rational::int(0));
        let d = DualCertificate {
            equality: vec![rational::int(0); 657],
            bell: rational::int(0),
            positivity: vec![rational::int(0); 1296],
            bound: rational::int(1),
        };
        assert!(!verify_certificate(&p, &d));
    }

    #[test]
    fn trivial_normalization_certificate_bounds_by_one() {
        // y = 1 on the normalization row of u*, s = the slack that leaves
        let p = problem(rational::int(0));
        let mut equality = vec![rational::int(0); 657];
        equality[TARGET_SETTING.index()] = rational::int(1);
        let positivity = positivity_multipliers(&p, &equality, &rational::int(0));
        let d = DualCertificate {
            equality,
            bell: rational::int(0),
            positivity,
            bound: rational::int(1),
        };
        assert!(verify_certificate(&p, &d));
        let mut tighter = d.clone();
        tighter.bound = rational::frac(99, 100);
        assert!(!verify_certificate(&p, &tighter));
    }

    #[test]
    fn randomness_bound_examples() {
        assert_eq!(randomness_bound(0.0, 0.1).unwrap(), 0.75);
        let b = randomness_bound(0.05 * 0.5f64.powi(8), 0.0).unwrap();
        assert!((b - 0.775).abs() < 1e-12);
        let eps = 0.2;
        let sat = 0.3f64.powi(8) / 2.0;
        assert!((randomness_bound(sat, eps).unwrap() - 1.0).abs() < 1e-12);
        assert!(randomness_bound(sat * 0.99, eps).unwrap() < 1.0);
        assert_eq!(randomness_bound(1.0, eps).unwrap(), 1.0);
        assert!(randomness_bound(0.0, 0.5).is_err());
        assert!(randomness_bound(-1.0, 0.1).is_err());
    }

    #[test]
    fn snap_recovers_small_fractions() {
        assert_eq!(snap(0.75), rational::frac(3, 4));
        assert_eq!(snap(-1.0 / 3.0 + 1e-15), rational::frac(-1, 3));
        assert_eq!(snap(1e-14), rational::int(0));
    }
}
