use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks_bell::{
    entry_index, BellFunctional, DeterministicStrategy, KsModel, OutcomePair, SettingPair,
    NUM_ENTRIES, NUM_OUTCOMES, NUM_OUTCOME_PAIRS, NUM_SETTINGS, NUM_SETTING_PAIRS,
};
use crate::rational::{self, Rational};

/// Conditional probability table `P(x1, x2 | u1, u2)`.
///
/// Stored flat, setting-major, with outcomes row-major inside a setting
/// (Alice's outcome outermost); see [`entry_index`].
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    table: Vec<f64>,
}

/// Same layout as [`Behavior`], exact entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactBehavior {
    table: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub min_entry: f64,
    pub normalization_residual: f64,
    pub signaling_residual: f64,
}

impl Behavior {
    /// Wraps a table after checking it at tolerance `tol`.
    pub fn from_table(table: Vec<f64>, tol: f64) -> Result<Self> {
        let b = Self::from_table_unchecked(table)?;
        let report = validate_behavior(&b, tol);
        if !report.ok {
            return Err(Error::InvalidBehavior(format!(
                "min entry {:e}, normalization residual {:e}, signaling residual {:e} (tol {tol:e})",
                report.min_entry, report.normalization_residual, report.signaling_residual
            )));
        }
        Ok(b)
    }

    /// Wraps a table checking only its shape and finiteness.
    pub fn from_table_unchecked(table: Vec<f64>) -> Result<Self> {
        if table.len() != NUM_ENTRIES {
            return Err(Error::InvalidBehavior(format!(
                "table has {} entries, expected {NUM_ENTRIES}",
                table.len()
            )));
        }
        if let Some(i) = table.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidBehavior(format!("entry {i} is not finite")));
        }
        Ok(Self { table })
    }

    pub fn uniform() -> Self {
        Self {
            table: vec![1.0 / NUM_OUTCOME_PAIRS as f64; NUM_ENTRIES],
        }
    }

    /// Deterministic local behavior of a strategy pair.
    pub fn deterministic(s: &DeterministicStrategy) -> Self {
        let mut table = vec![0.0; NUM_ENTRIES];
        for u in SettingPair::all() {
            table[entry_index(s.outcome(u), u)] = 1.0;
        }
        Self { table }
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, x: OutcomePair, u: SettingPair) -> f64 {
        self.table[entry_index(x, u)]
    }

    /// The 16 outcome probabilities for one setting pair, row-major.
    pub fn row(&self, u: SettingPair) -> &[f64] {
        let start = u.index() * NUM_OUTCOME_PAIRS;
        &self.table[start..start + NUM_OUTCOME_PAIRS]
    }

    /// Convex combination `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &Behavior, alpha: f64) -> Behavior {
        Behavior {
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        }
    }

    pub fn to_json(&self, meta: serde_json::Map<String, serde_json::Value>) -> BehaviorJson {
        BehaviorJson {
            settings: NUM_SETTINGS,
            outcomes: NUM_OUTCOMES,
            table: self.table.clone(),
            meta,
        }
    }
}

impl ExactBehavior {
    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn prob(&self, x: OutcomePair, u: SettingPair) -> &Rational {
        &self.table[entry_index(x, u)]
    }

    pub fn to_f64(&self) -> Behavior {
        Behavior {
            table: self.table.iter().map(rational::to_f64).collect(),
        }
    }

    /// Exact raw Bell value `sum_{(x,u) in S_B} P(x|u)`.
    pub fn raw_bell_value(&self, f: &BellFunctional) -> Rational {
        f.sb().iter().map(|&(x, u)| self.prob(x, u).clone()).sum()
    }

    /// Exact normalization and no-signaling check.
    pub fn is_valid(&self) -> bool {
        use num_traits::{One, Signed};
        if self.table.iter().any(|p| p.is_negative()) {
            return false;
        }
        let sums_ok = SettingPair::all().all(|u| {
            let s: Rational = OutcomePair::all().map(|x| self.prob(x, u).clone()).sum();
            s.is_one()
        });
        sums_ok && exact_marginals_consistent(self)
    }
}

fn exact_marginals_consistent(b: &ExactBehavior) -> bool {
    let alice = |u: SettingPair, xa: u8| -> Rational {
        (1..=NUM_OUTCOMES as u8).map(|xb| b.prob(OutcomePair::new(xa, xb), u).clone()).sum()
    };
    let bob = |u: SettingPair, xb: u8| -> Rational {
        (1..=NUM_OUTCOMES as u8).map(|xa| b.prob(OutcomePair::new(xa, xb), u).clone()).sum()
    };
    for s in 1..=NUM_SETTINGS as u8 {
        for x in 1..=NUM_OUTCOMES as u8 {
            let a_ref = alice(SettingPair::new(s, 1), x);
            let b_ref = bob(SettingPair::new(1, s), x);
            for other in 2..=NUM_SETTINGS as u8 {
                if alice(SettingPair::new(s, other), x) != a_ref
                    || bob(SettingPair::new(other, s), x) != b_ref
                {
                    return false;
                }
            }
        }
    }
    true
}

/// Serialized behavior: `{"settings":9,"outcomes":4,"table":[...],"meta":{...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorJson {
    pub settings: usize,
    pub outcomes: usize,
    pub table: Vec<f64>,
    #[serde(default)]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

impl BehaviorJson {
    pub fn into_behavior(self, tol: f64) -> Result<Behavior> {
        if self.settings != NUM_SETTINGS || self.outcomes != NUM_OUTCOMES {
            return Err(Error::InvalidBehavior(format!(
                "expected 9 settings and 4 outcomes, got {} and {}",
                self.settings, self.outcomes
            )));
        }
        Behavior::from_table(self.table, tol)
    }
}

/// Closed-form statistics of the maximally entangled two-ququart state
/// measured in the Kochen-Specker bases:
/// `P(x|u) = <v_a|v_b>^2 / (4 |v_a|^2 |v_b|^2)`, which is `Tr(P_a P_b) / 4`
/// for real rank-one projectors.
pub fn ideal_quantum_box_exact(model: &KsModel) -> ExactBehavior {
    let mut table = vec![rational::int(0); NUM_ENTRIES];
    for u in SettingPair::all() {
        for x in OutcomePair::all() {
            let a = &model.vectors()[model.vector_at(u.alice, x.alice)];
            let b = &model.vectors()[model.vector_at(u.bob, x.bob)];
            let ip = crate::ks_bell::inner(a, b);
            table[entry_index(x, u)] = rational::frac(
                ip * ip,
                4 * crate::ks_bell::norm_sq(a) * crate::ks_bell::norm_sq(b),
            );
        }
    }
    ExactBehavior { table }
}

pub fn ideal_quantum_box(model: &KsModel) -> Behavior {
    ideal_quantum_box_exact(model).to_f64()
}

/// White-noise mixing `(1 - eta) b + eta * uniform`.
pub fn depolarize(b: &Behavior, eta: f64) -> Result<Behavior> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(crate::error::invalid(format!("noise level {eta} outside [0,1]")));
    }
    Ok(Behavior::uniform().mix(b, eta))
}

/// Residuals of nonnegativity, normalization and no-signaling.
///
/// No-signaling is measured as the largest deviation of either party's
/// marginal from its value at the other party's setting 1.
pub fn validate_behavior(b: &Behavior, tol: f64) -> ValidationReport {
    let min_entry = b.table.iter().copied().fold(f64::INFINITY, f64::min);
    let mut normalization_residual = 0.0f64;
    for u in SettingPair::all() {
        let s: f64 = b.row(u).iter().sum();
        normalization_residual = normalization_residual.max((s - 1.0).abs());
    }
    let mut alice = [[[0.0f64; NUM_OUTCOMES]; NUM_SETTINGS]; NUM_SETTINGS];
    let mut bob = [[[0.0f64; NUM_OUTCOMES]; NUM_SETTINGS]; NUM_SETTINGS];
    for u in SettingPair::all() {
        let (ua, ub) = (u.alice as usize - 1, u.bob as usize - 1);
        for x in OutcomePair::all() {
            let p = b.prob(x, u);
            alice[ua][ub][x.alice as usize - 1] += p;
            bob[ub][ua][x.bob as usize - 1] += p;
        }
    }
    let mut signaling_residual = 0.0f64;
    for own in 0..NUM_SETTINGS {
        for other in 1..NUM_SETTINGS {
            for x in 0..NUM_OUTCOMES {
                signaling_residual = signaling_residual
                    .max((alice[own][other][x] - alice[own][0][x]).abs())
                    .max((bob[own][other][x] - bob[own][0][x]).abs());
            }
        }
    }
    ValidationReport {
        ok: min_entry >= -tol && normalization_residual <= tol && signaling_residual <= tol,
        min_entry,
        normalization_residual,
        signaling_residual,
    }
}

/// A probability distribution over the 81 setting pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingMeasure {
    weights: Vec<f64>,
}

impl SettingMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() != NUM_SETTING_PAIRS {
            return Err(crate::error::invalid(format!(
                "measure has {} weights, expected {NUM_SETTING_PAIRS}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(crate::error::invalid("measure weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(crate::error::invalid(format!("measure sums to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform() -> Self {
        Self {
            weights: vec![1.0 / NUM_SETTING_PAIRS as f64; NUM_SETTING_PAIRS],
        }
    }

    pub fn point(u: SettingPair) -> Self {
        let mut weights = vec![0.0; NUM_SETTING_PAIRS];
        weights[u.index()] = 1.0;
        Self { weights }
    }

    pub fn weight(&self, u: SettingPair) -> f64 {
        self.weights[u.index()]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `sum_u nu(u) sum_x B(x,u) P(x|u)`.
pub fn bell_value(b: &Behavior, f: &BellFunctional, measure: &SettingMeasure) -> f64 {
    f.sb()
        .iter()
        .map(|&(x, u)| measure.weight(u) * b.prob(x, u))
        .sum()
}

/// Bell value under the counting measure, `B . P`.
pub fn raw_bell_value(b: &Behavior, f: &BellFunctional) -> f64 {
    f.sb().iter().map(|&(x, u)| b.prob(x, u)).sum()
}

/// Inverse-CDF draw over the 16 outcomes in row-major order.
pub fn sample_from_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> OutcomePair {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if r < acc {
            return OutcomePair::from_index(i);
        }
    }
    // r landed in the rounding gap above the cumulative sum
    OutcomePair::from_index(last_positive)
}

pub fn sample_outcome<R: Rng + ?Sized>(b: &Behavior, u: SettingPair, rng: &mut R) -> OutcomePair {
    sample_from_row(b.row(u), rng)
}
