//! Concentration bounds and white-box empirical checks against them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::ks_bell::TARGET_SETTING;
use crate::seed::derive_seed;
use crate::sv_source::{SettingMap, Strategy, SvSource};

/// Martingale form `2 exp(-n s^2 / 2)` for `Pr(|L_n - Lbar_n| >= s)`.
pub fn azuma_bound(n: usize, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid("deviation s must be positive"));
    }
    Ok(2.0 * (-(n as f64) * s * s / 2.0).exp())
}

/// Security-chain form `2 exp(-n s^2 / 4)`. It is what the error terms of
/// the protocol use, and is weaker than [`azuma_bound`] by the square root.
pub fn azuma_bound_chain(n: usize, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid("deviation s must be positive"));
    }
    Ok(2.0 * (-(n as f64) * s * s / 4.0).exp())
}

/// Indicators `B_i` together with their conditional means given the past.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MartingaleTrace {
    pub b: Vec<bool>,
    pub b_bar: Vec<f64>,
}

impl MartingaleTrace {
    pub fn push(&mut self, b: bool, b_bar: f64) {
        debug_assert!((0.0..=1.0).contains(&b_bar));
        self.b.push(b);
        self.b_bar.push(b_bar);
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// `L_n - Lbar_n`.
    pub fn deviation(&self) -> f64 {
        let n = self.len() as f64;
        let hits = self.b.iter().filter(|&&b| b).count() as f64;
        (hits - self.b_bar.iter().sum::<f64>()) / n
    }
}

/// Outcome of a one-sided Monte Carlo check `frequency <= bound + 3 sigma`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalCheck {
    pub name: String,
    pub n: usize,
    pub trials: usize,
    pub frequency: f64,
    pub bound: f64,
    /// Binomial standard error at the bound.
    pub sigma: f64,
    pub passed: bool,
}

impl EmpiricalCheck {
    pub fn new(name: impl Into<String>, n: usize, trials: usize, hits: usize, bound: f64) -> Self {
        let frequency = hits as f64 / trials as f64;
        let p = bound.clamp(0.0, 1.0);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        Self {
            name: name.into(),
            n,
            trials,
            frequency,
            bound,
            sigma,
            passed: frequency <= bound + 3.0 * sigma,
        }
    }
}

/// Runs `trials` independent traces from `gen` (seeded per trial from
/// `seed`) and counts `|L_n - Lbar_n| >= s`.
pub fn azuma_empirical<F>(name: &str, n: usize, s: f64, trials: usize, seed: u64, gen: F) -> Result<EmpiricalCheck>
where
    F: Fn(usize, &mut ChaCha20Rng) -> MartingaleTrace + Sync,
{
    let bound = azuma_bound(n, s)?;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, t as u64));
            gen(n, &mut rng).deviation().abs() >= s
        })
        .count();
    Ok(EmpiricalCheck::new(name, n, trials, hits, bound))
}

/// Fair coins: `B_i` uniform, `Bbar_i = 1/2`.
pub fn fair_coin_trace(n: usize, rng: &mut ChaCha20Rng) -> MartingaleTrace {
    let mut t = MartingaleTrace::default();
    for _ in 0..n {
        t.push(rng.gen::<bool>(), 0.5);
    }
    t
}

/// Positions whose conditional mean is at most `sqrt(delta)`. At least
/// `(1 - sqrt(delta)) n` of them exist whenever the mean is at most `delta`.
pub fn linear_fraction(values: &[f64], delta: f64) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(invalid("no values"));
    }
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(invalid("values must lie in [0, 1]"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    // summation rounding may push an exact-delta mean a few ulps over
    if mean > delta * (1.0 + 8.0 * f64::EPSILON) {
        return Err(Error::Precondition(format!("mean {mean} exceeds delta {delta}")));
    }
    let root = delta.sqrt();
    let set: Vec<usize> = (0..values.len()).filter(|&i| values[i] <= root).collect();
    // tolerate one ulp-level rounding of the mean
    assert!(
        set.len() as f64 >= (1.0 - root) * n - 1e-9 * n,
        "linear fraction postcondition violated"
    );
    Ok(set)
}

/// One round as the conditional-count bound sees it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TomographyRound {
    pub at_target: bool,
    /// `P(x* | u*, past)`: the device's conditional box at the target.
    pub p_target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountCheck {
    pub count: usize,
    pub bound: f64,
    pub s_bar: f64,
}

/// `(mu1 - 2 kappa) / (2 (1 - kappa))`.
pub fn tomography_fraction(mu1: f64, kappa: f64) -> f64 {
    (mu1 - 2.0 * kappa) / (2.0 * (1.0 - kappa))
}

/// Counts target rounds whose conditional box gives `x*` probability at
/// least `kappa`, and asserts the count reaches `n (mu1 - 2 kappa) / (2 (1 - kappa))`.
///
/// Precondition: `Sbar_n = (1/n) sum_i [u_i = u*] P(x*|u*, past) >= mu1 / 2`.
pub fn tomography_count_check(rounds: &[TomographyRound], mu1: f64, kappa: f64) -> Result<CountCheck> {
    if !(0.0 < kappa && kappa < 1.0) {
        return Err(invalid("kappa must lie in (0, 1)"));
    }
    let n = rounds.len() as f64;
    let s_bar = rounds.iter().filter(|r| r.at_target).map(|r| r.p_target).sum::<f64>() / n;
    if s_bar < mu1 / 2.0 {
        return Err(Error::Precondition(format!("Sbar_n = {s_bar} below mu1/2 = {}", mu1 / 2.0)));
    }
    let count = rounds.iter().filter(|r| r.at_target && r.p_target >= kappa).count();
    let bound = n * tomography_fraction(mu1, kappa);
    assert!(count as f64 >= bound - 1e-9 * n, "conditional count below the bound");
    Ok(CountCheck { count, bound, s_bar })
}

/// `D(gamma || zeta)` in nats, with `0 ln 0 = 0` and `+inf` when
/// `gamma > 0 = zeta` or `gamma < 1 = zeta`.
pub fn relative_entropy(gamma: f64, zeta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) || !(0.0..=1.0).contains(&zeta) {
        return Err(invalid("arguments must lie in [0, 1]"));
    }
    let term = |p: f64, q: f64| -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    };
    Ok(term(gamma, zeta) + term(1.0 - gamma, 1.0 - zeta))
}

/// `exp(-n D(gamma || zeta))` for `0 <= zeta <= gamma <= 1`.
pub fn chernoff_bound(n: usize, gamma: f64, zeta: f64) -> Result<f64> {
    if !(0.0 <= zeta && zeta <= gamma && gamma <= 1.0) {
        return Err(invalid(format!("need 0 <= zeta <= gamma <= 1, got zeta={zeta}, gamma={gamma}")));
    }
    let d = relative_entropy(gamma, zeta)?;
    assert!(d >= 2.0 * (gamma - zeta).powi(2) - 1e-15, "Pinsker-type lower bound violated");
    Ok((-(n as f64) * d).exp())
}

/// Counts `sum X_i >= gamma n` over seeded trials of `gen`, which returns
/// the number of ones among `n` Boolean variables.
pub fn chernoff_empirical<F>(name: &str, n: usize, gamma: f64, zeta: f64, trials: usize, seed: u64, gen: F) -> Result<EmpiricalCheck>
where
    F: Fn(usize, &mut ChaCha20Rng) -> usize + Sync,
{
    let bound = chernoff_bound(n, gamma, zeta)?;
    let threshold = gamma * n as f64;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, t as u64));
            gen(n, &mut rng) as f64 >= threshold
        })
        .count();
    Ok(EmpiricalCheck::new(name, n, trials, hits, bound))
}

/// Deviation at which [`azuma_bound`] equals `level`.
pub fn azuma_deviation_for(n: usize, level: f64) -> f64 {
    (2.0 * (2.0 / level).ln() / n as f64).sqrt()
}

/// The standard concentration checks at each `n`: fair-coin and SV-bit
/// martingales against Azuma, the SV settings stream under the
/// target-avoiding adversary against Chernoff, and a linear-fraction fuzz.
pub fn verification_suite(ns: &[usize], trials: usize, fuzz: usize, seed: u64) -> Result<Vec<EmpiricalCheck>> {
    let map = SettingMap::mod9();
    let eps = 0.1;
    let avoid = Strategy::AvoidTarget { target: TARGET_SETTING };
    SvSource::new(eps, avoid.clone(), &map, 0)?;
    let zeta = 1.0 - (0.5 - eps).powi(8);
    let gamma = (1.0 + zeta) / 2.0;
    let mut out = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let s = azuma_deviation_for(n, 0.05);
        let base = derive_seed(seed, k as u64);
        out.push(azuma_empirical("azuma_fair_coin", n, s, trials, derive_seed(base, 0), fair_coin_trace)?);
        let strat = avoid.clone();
        let map2 = map.clone();
        out.push(azuma_empirical("azuma_sv_bits", n, s, trials, derive_seed(base, 1), move |n, rng| {
            let mut src = SvSource::new(eps, strat.clone(), &map2, rng.gen()).expect("validated above");
            let mut t = MartingaleTrace::default();
            for _ in 0..n {
                let p0 = src.p_zero();
                t.push(!src.next_bit(), p0);
            }
            t
        })?);
        let strat = avoid.clone();
        let map2 = map.clone();
        out.push(chernoff_empirical("chernoff_sv_avoid_target", n, gamma, zeta, trials, derive_seed(base, 2), move |n, rng| {
            let mut src = SvSource::new(eps, strat.clone(), &map2, rng.gen()).expect("validated above");
            (0..n).filter(|_| src.next_setting(&map2) != TARGET_SETTING).count()
        })?);
    }
    out.push(linear_fraction_fuzz(fuzz, derive_seed(seed, u64::MAX))?);
    Ok(out)
}

/// Random instances of [`linear_fraction`] with `delta` at or above the
/// mean. The postcondition is asserted inside, so a violation panics.
pub fn linear_fraction_fuzz(instances: usize, seed: u64) -> Result<EmpiricalCheck> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..instances {
        let len = rng.gen_range(1..=200);
        // skewed values so that some exceed sqrt(delta)
        let vals: Vec<f64> = (0..len).map(|_| rng.gen::<f64>().powi(rng.gen_range(1..=8))).collect();
        let mean = vals.iter().sum::<f64>() / len as f64;
        let delta = (mean * (1.0 + rng.gen::<f64>() * 0.1)).clamp(f64::MIN_POSITIVE, 1.0);
        let set = linear_fraction(&vals, delta)?;
        failures += ((set.len() as f64) < (1.0 - delta.sqrt()) * len as f64 - 1e-9 * len as f64) as usize;
    }
    Ok(EmpiricalCheck::new("linear_fraction_fuzz", 200, instances, failures, 0.0))
}
