//! Santha-Vazirani bit sources and the bits-to-settings map.
//!
//! Every built-in strategy picks, from the history alone, a direction
//! `s in {-1, 0, +1}` and emits 0 with probability `1/2 + s * eps`, so the
//! SV condition holds by construction. Exact oracles below work in
//! rationals.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::boxes::SettingMeasure;
use crate::error::{invalid, Error, Result};
use crate::ks_bell::{SettingPair, NUM_SETTINGS, NUM_SETTING_PAIRS, TARGET_SETTING};
use crate::rational::{self, Rational};

/// Bits per joint setting, four per party.
pub const BITS_PER_SETTING: usize = 8;

/// Per-party map from 4-bit values to settings `1..=9`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingMap {
    pub id: String,
    pub alice: [u8; 16],
    pub bob: [u8; 16],
}

impl Default for SettingMap {
    fn default() -> Self {
        Self::mod9()
    }
}

impl SettingMap {
    /// `v -> (v mod 9) + 1` for both parties.
    pub fn mod9() -> Self {
        let mut m = [0u8; 16];
        for (v, s) in m.iter_mut().enumerate() {
            *s = (v % NUM_SETTINGS) as u8 + 1;
        }
        Self {
            id: "mod9-v1".into(),
            alice: m,
            bob: m,
        }
    }

    pub fn new(id: impl Into<String>, alice: [u8; 16], bob: [u8; 16]) -> Result<Self> {
        for (party, m) in [("alice", &alice), ("bob", &bob)] {
            for s in 1..=NUM_SETTINGS as u8 {
                if !m.contains(&s) {
                    return Err(invalid(format!("{party} map misses setting {s}")));
                }
            }
            if m.iter().any(|&s| s == 0 || s as usize > NUM_SETTINGS) {
                return Err(invalid(format!("{party} map has a value outside 1..=9")));
            }
        }
        Ok(Self {
            id: id.into(),
            alice,
            bob,
        })
    }

    /// Looks a map up by id; only the default map is built in.
    pub fn by_id(id: &str) -> Result<Self> {
        let m = Self::mod9();
        if id == m.id {
            Ok(m)
        } else {
            Err(invalid(format!("unknown setting map {id:?}")))
        }
    }

    /// Setting pair of one 8-bit pattern, Alice's nibble first, MSB first.
    pub fn setting_of_byte(&self, byte: u8) -> SettingPair {
        SettingPair::new(self.alice[(byte >> 4) as usize], self.bob[(byte & 15) as usize])
    }

    pub fn setting(&self, bits: &[bool]) -> Result<SettingPair> {
        if bits.len() != BITS_PER_SETTING {
            return Err(invalid(format!("expected 8 bits, got {}", bits.len())));
        }
        Ok(self.setting_of_byte(bits_to_byte(bits)))
    }

    /// Number of 8-bit patterns mapping to `u`.
    pub fn preimages(&self, u: SettingPair) -> usize {
        let a = self.alice.iter().filter(|&&s| s == u.alice).count();
        let b = self.bob.iter().filter(|&&s| s == u.bob).count();
        a * b
    }

    /// `mask[byte]` is true when the pattern maps to `u`.
    pub fn preimage_mask(&self, u: SettingPair) -> [bool; 256] {
        let mut m = [false; 256];
        for (byte, v) in m.iter_mut().enumerate() {
            *v = self.setting_of_byte(byte as u8) == u;
        }
        m
    }

    /// Setting distribution under unbiased bits, exactly.
    pub fn uniform_measure_exact(&self) -> Vec<Rational> {
        let mut w = vec![Rational::zero(); NUM_SETTING_PAIRS];
        for byte in 0..=255u8 {
            w[self.setting_of_byte(byte).index()] += rational::frac(1, 256);
        }
        w
    }

    pub fn uniform_measure(&self) -> SettingMeasure {
        let w = self.uniform_measure_exact().iter().map(rational::to_f64).collect();
        SettingMeasure::new(w).expect("uniform bits give a probability measure")
    }
}

/// Maps 8 bits with the default map.
pub fn map_bits_to_settings(bits: &[bool]) -> Result<SettingPair> {
    SettingMap::mod9().setting(bits)
}

pub fn bits_to_byte(bits: &[bool]) -> u8 {
    bits.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8)
}

pub fn byte_to_bits(byte: u8) -> [bool; 8] {
    std::array::from_fn(|i| byte >> (7 - i) & 1 == 1)
}

/// Bias rule of a source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Unbiased,
    /// Bit `i` leans toward 0 when `signs[i mod len] > 0`, toward 1 when negative.
    ConstantBias { signs: Vec<i8> },
    /// Leans each bit of a round so as to minimize the chance that the
    /// round's 8 bits map to `target`.
    AvoidTarget {
        #[serde(default = "default_target")]
        target: SettingPair,
    },
    /// Leans bit `i` toward `pattern[i mod len]`.
    TowardPattern { pattern: Vec<bool> },
}

fn default_target() -> SettingPair {
    TARGET_SETTING
}

impl Strategy {
    /// Leans every round toward the first 8-bit pattern that maps to `u`.
    pub fn toward_setting(map: &SettingMap, u: SettingPair) -> Self {
        let byte = (0..=255u8).find(|&b| map.setting_of_byte(b) == u).expect("maps are surjective");
        Self::TowardPattern {
            pattern: byte_to_bits(byte).to_vec(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Unbiased => "unbiased",
            Self::ConstantBias { .. } => "constant_bias",
            Self::AvoidTarget { .. } => "avoid_target",
            Self::TowardPattern { .. } => "toward_pattern",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::ConstantBias { signs } if signs.is_empty() => Err(invalid("constant_bias needs at least one sign")),
            Self::TowardPattern { pattern } if pattern.is_empty() => Err(invalid("toward_pattern needs a non-empty pattern")),
            _ => Ok(()),
        }
    }
}

/// A strategy compiled against a map: answers the lean of the next bit.
#[derive(Clone, Debug)]
pub struct Leaner {
    strategy: Strategy,
    /// For `AvoidTarget`: lean at each internal node of the 8-bit round
    /// tree, indexed `(1 << depth) | prefix`.
    tree: Vec<i8>,
}

impl Leaner {
    pub fn new(strategy: Strategy, map: &SettingMap, eps: &Rational) -> Result<Self> {
        strategy.validate()?;
        let tree = match &strategy {
            Strategy::AvoidTarget { target } => round_policy(&map.preimage_mask(*target), eps, Goal::Min).1,
            _ => Vec::new(),
        };
        Ok(Self { strategy, tree })
    }

    /// Lean of the next bit given all bits emitted so far.
    pub fn lean(&self, history: &[bool]) -> i8 {
        let pos = history.len();
        match &self.strategy {
            Strategy::Unbiased => 0,
            Strategy::ConstantBias { signs } => signs[pos % signs.len()].signum(),
            Strategy::TowardPattern { pattern } => {
                if pattern[pos % pattern.len()] {
                    -1
                } else {
                    1
                }
            }
            Strategy::AvoidTarget { .. } => {
                let depth = pos % BITS_PER_SETTING;
                let prefix = bits_to_byte(&history[pos - depth..]) as usize;
                self.tree[(1 << depth) | prefix]
            }
        }
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    Min,
    Max,
}

/// Optimal probability of landing in `mask` over one 8-bit round, when
/// every bit may lean by `eps` either way, and the optimal lean per node.
fn round_policy(mask: &[bool; 256], eps: &Rational, goal: Goal) -> (Rational, Vec<i8>) {
    let half = rational::frac(1, 2);
    let hi = &half + eps;
    let lo = &half - eps;
    let mut level: Vec<Rational> = mask.iter().map(|&m| if m { Rational::one() } else { Rational::zero() }).collect();
    let mut lean = vec![0i8; 256];
    for depth in (0..BITS_PER_SETTING).rev() {
        let mut next = Vec::with_capacity(1 << depth);
        for prefix in 0..1usize << depth {
            let (v0, v1) = (&level[2 * prefix], &level[2 * prefix + 1]);
            // leaning toward 0 gives hi*v0 + lo*v1
            let s: i8 = match (goal, v0.cmp(v1)) {
                (_, std::cmp::Ordering::Equal) => 0,
                (Goal::Min, std::cmp::Ordering::Less) | (Goal::Max, std::cmp::Ordering::Greater) => 1,
                _ => -1,
            };
            let v = match s {
                1 => &hi * v0 + &lo * v1,
                -1 => &lo * v0 + &hi * v1,
                _ => &half * (v0 + v1),
            };
            lean[(1 << depth) | prefix] = s;
            next.push(v);
        }
        level = next;
    }
    (level.pop().expect("root"), lean)
}

/// Source description as stored in configs: `{epsilon, strategy, seed}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub epsilon: f64,
    pub strategy: Strategy,
    #[serde(default)]
    pub seed: u64,
}

/// A seeded epsilon-SV bit stream.
#[derive(Clone, Debug)]
pub struct SvSource {
    eps: f64,
    eps_exact: Rational,
    leaner: Leaner,
    history: Vec<bool>,
    rng: ChaCha20Rng,
    seed: u64,
}

/// Exact value of an epsilon given in floating point, read through its
/// shortest decimal form so `0.1` means 1/10.
pub fn exact_epsilon(eps: f64) -> Result<Rational> {
    if !(0.0..0.5).contains(&eps) {
        return Err(invalid(format!("epsilon {eps} outside [0, 1/2)")));
    }
    rational::parse_decimal(&format!("{eps}"))
}

impl SvSource {
    pub fn new(eps: f64, strategy: Strategy, map: &SettingMap, seed: u64) -> Result<Self> {
        let eps_exact = exact_epsilon(eps)?;
        Ok(Self {
            leaner: Leaner::new(strategy, map, &eps_exact)?,
            eps,
            eps_exact,
            history: Vec::new(),
            rng: ChaCha20Rng::seed_from_u64(seed),
            seed,
        })
    }

    pub fn from_spec(spec: &SourceSpec, map: &SettingMap) -> Result<Self> {
        Self::new(spec.epsilon, spec.strategy.clone(), map, spec.seed)
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn epsilon_exact(&self) -> &Rational {
        &self.eps_exact
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn history(&self) -> &[bool] {
        &self.history
    }

    pub fn strategy(&self) -> &Strategy {
        self.leaner.strategy()
    }

    /// `P(next bit = 0 | history)` in floating point.
    pub fn p_zero(&self) -> f64 {
        0.5 + self.leaner.lean(&self.history) as f64 * self.eps
    }

    pub fn next_bit(&mut self) -> bool {
        let p0 = self.p_zero();
        let bit = self.rng.gen::<f64>() >= p0;
        self.history.push(bit);
        bit
    }

    pub fn next_bits(&mut self, k: usize) -> Vec<bool> {
        (0..k).map(|_| self.next_bit()).collect()
    }

    /// Draws 8 bits and maps them to a setting pair.
    pub fn next_setting(&mut self, map: &SettingMap) -> SettingPair {
        let mut byte = 0u8;
        for _ in 0..BITS_PER_SETTING {
            byte = (byte << 1) | self.next_bit() as u8;
        }
        map.setting_of_byte(byte)
    }
}

/// Conditional law `P(0 | h)` of a strategy for every history shorter
/// than `depth`, in exact arithmetic.
pub fn conditional_table(strategy: &Strategy, map: &SettingMap, eps: &Rational, depth: usize) -> Result<Vec<(Vec<bool>, Rational)>> {
    if depth > 20 {
        return Err(invalid("conditional tables are limited to depth 20"));
    }
    let leaner = Leaner::new(strategy.clone(), map, eps)?;
    let half = rational::frac(1, 2);
    let mut out = Vec::with_capacity(1 << depth);
    for len in 0..depth {
        for code in 0..1u32 << len {
            let h: Vec<bool> = (0..len).map(|i| code >> (len - 1 - i) & 1 == 1).collect();
            let p = &half + eps * rational::int(leaner.lean(&h) as i64);
            out.push((h, p));
        }
    }
    Ok(out)
}

/// Largest `|P(0|h) - 1/2|` over all histories shorter than `depth`;
/// errors if it exceeds `eps`.
pub fn check_epsilon_band(strategy: &Strategy, map: &SettingMap, eps: &Rational, depth: usize) -> Result<Rational> {
    let half = rational::frac(1, 2);
    let mut worst = Rational::zero();
    for (h, p) in conditional_table(strategy, map, eps, depth)? {
        let dev = num_traits::Signed::abs(&(p - &half));
        if &dev > eps {
            return Err(Error::Precondition(format!("history {h:?} leaves the epsilon band")));
        }
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Bounds on the probability `nu(u)` that one round lands on `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureBounds {
    /// `(1/2 - eps)^8`, valid for any map.
    pub lower: Rational,
    /// `#preimages * (1/2 + eps)^8`.
    pub upper: Rational,
    /// Exact minimum over all SV strategies.
    pub dp_min: Rational,
    /// Exact maximum over all SV strategies.
    pub dp_max: Rational,
}

pub fn setting_measure_bounds(eps: &Rational, map: &SettingMap, u: SettingPair) -> Result<MeasureBounds> {
    check_eps(eps)?;
    let half = rational::frac(1, 2);
    let mask = map.preimage_mask(u);
    Ok(MeasureBounds {
        lower: rational::pow(&(&half - eps), 8),
        upper: rational::int(map.preimages(u) as i64) * rational::pow(&(&half + eps), 8),
        dp_min: round_policy(&mask, eps, Goal::Min).0,
        dp_max: round_policy(&mask, eps, Goal::Max).0,
    })
}

fn check_eps(eps: &Rational) -> Result<()> {
    if eps < &Rational::zero() || eps >= &rational::frac(1, 2) {
        return Err(invalid(format!("epsilon {} outside [0, 1/2)", rational::to_string(eps))));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChernoffOracle {
    /// Max over adaptive SV strategies of `Pr(no round among k hits u*)`.
    pub exact_max: Rational,
    /// `zeta^k` with `zeta = 1 - (1/2 - eps)^8`.
    pub zeta_bound: Rational,
}

pub const CHERNOFF_ORACLE_MAX_K: usize = 20;

/// Rounds couple only through the history, and the best the adversary can
/// do in each round does not depend on it, so the optimum over `k` rounds
/// is the single-round optimum to the power `k`.
pub fn sv_chernoff_oracle(eps: &Rational, map: &SettingMap, k: usize) -> Result<ChernoffOracle> {
    check_eps(eps)?;
    if k > CHERNOFF_ORACLE_MAX_K {
        return Err(invalid(format!("k = {k} exceeds the exact limit {CHERNOFF_ORACLE_MAX_K}")));
    }
    let miss = Rational::one() - round_policy(&map.preimage_mask(TARGET_SETTING), eps, Goal::Min).0;
    let zeta = Rational::one() - rational::pow(&(rational::frac(1, 2) - eps), 8);
    let out = ChernoffOracle {
        exact_max: rational::pow(&miss, k as u32),
        zeta_bound: rational::pow(&zeta, k as u32),
    };
    if out.exact_max > out.zeta_bound {
        return Err(Error::Precondition("SV Chernoff premise violated".into()));
    }
    Ok(out)
}

/// Same quantity by backward induction over the full tree of `8k` bits,
/// without the per-round factorization. Exponential; `k <= 2`.
pub fn sv_chernoff_tree(eps: &Rational, map: &SettingMap, k: usize) -> Result<Rational> {
    check_eps(eps)?;
    if k > 2 {
        return Err(invalid("full-tree evaluation is limited to k <= 2"));
    }
    let mask = map.preimage_mask(TARGET_SETTING);
    let bits = BITS_PER_SETTING * k;
    let half = rational::frac(1, 2);
    let (hi, lo) = (&half + eps, &half - eps);
    let mut level: Vec<Rational> = (0..1usize << bits)
        .map(|leaf| {
            let miss = (0..k).all(|r| !mask[(leaf >> (8 * (k - 1 - r))) & 255]);
            if miss {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    for _ in 0..bits {
        level = level
            .chunks(2)
            .map(|c| {
                let a = &hi * &c[0] + &lo * &c[1];
                let b = &lo * &c[0] + &hi * &c[1];
                a.max(b)
            })
            .collect();
    }
    Ok(level.pop().expect("root"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn bits(s: &str) -> Vec<bool> {
        s.chars().filter(|c| !c.is_whitespace()).map(|c| c == '1').collect()
    }

    #[test]
    fn map_examples() {
        assert_eq!(map_bits_to_settings(&bits("0000 0001")).unwrap(), TARGET_SETTING);
        assert_eq!(map_bits_to_settings(&bits("1111 1111")).unwrap(), SettingPair::new(7, 7));
        assert!(map_bits_to_settings(&bits("0101")).is_err());
        let m = SettingMap::mod9();
        for s in 1..=9u8 {
            let pre = m.alice.iter().filter(|&&v| v == s).count();
            assert_eq!(pre, if s <= 7 { 2 } else { 1 });
        }
        assert_eq!(m.uniform_measure_exact()[TARGET_SETTING.index()], frac(1, 64));
    }

    #[test]
    fn non_surjective_map_rejected() {
        let mut a = SettingMap::mod9().alice;
        a[8] = 1; // setting 9 loses its only preimage
        assert!(SettingMap::new("bad", a, SettingMap::mod9().bob).is_err());
    }

    #[test]
    fn measure_bounds_examples() {
        let m = SettingMap::mod9();
        let b = setting_measure_bounds(&int(0), &m, TARGET_SETTING).unwrap();
        assert_eq!(b.dp_min, frac(1, 64));
        assert_eq!(b.dp_max, frac(1, 64));
        assert_eq!(b.lower, frac(1, 256));
        let b = setting_measure_bounds(&frac(1, 10), &m, TARGET_SETTING).unwrap();
        assert_eq!(b.lower, rational::pow(&frac(2, 5), 8));
        assert!((rational::to_f64(&b.lower) - 6.5536e-4).abs() < 1e-12);
    }

    #[test]
    fn dp_extremes_bracket_every_setting() {
        let m = SettingMap::mod9();
        for eps in [frac(1, 20), frac(1, 5), frac(9, 20)] {
            for u in SettingPair::all() {
                let b = setting_measure_bounds(&eps, &m, u).unwrap();
                assert!(b.lower <= b.dp_min && b.dp_min <= b.dp_max && b.dp_max <= b.upper, "{u}");
            }
        }
    }

    #[test]
    fn chernoff_oracle_examples() {
        let m = SettingMap::mod9();
        let o = sv_chernoff_oracle(&int(0), &m, 1).unwrap();
        assert_eq!(o.exact_max, frac(63, 64));
        assert_eq!(o.zeta_bound, frac(255, 256));
        assert_eq!(sv_chernoff_oracle(&int(0), &m, 2).unwrap().exact_max, frac(63 * 63, 64 * 64));
        let o = sv_chernoff_oracle(&frac(1, 10), &m, 1).unwrap();
        assert!(o.exact_max <= int(1) - rational::pow(&frac(2, 5), 8));
        assert!(sv_chernoff_oracle(&int(0), &m, 21).is_err());
    }

    #[test]
    fn factorized_oracle_matches_full_tree() {
        let m = SettingMap::mod9();
        for eps in [int(0), frac(1, 10), frac(3, 10)] {
            for k in 1..=2 {
                assert_eq!(sv_chernoff_tree(&eps, &m, k).unwrap(), sv_chernoff_oracle(&eps, &m, k).unwrap().exact_max);
            }
        }
    }

    #[test]
    fn epsilon_band_for_builtins() {
        let m = SettingMap::mod9();
        let eps = frac(1, 10);
        for s in [
            Strategy::Unbiased,
            Strategy::ConstantBias { signs: vec![1, -1, 1] },
            Strategy::AvoidTarget { target: TARGET_SETTING },
            Strategy::toward_setting(&m, TARGET_SETTING),
        ] {
            let worst = check_epsilon_band(&s, &m, &eps, 12).unwrap();
            assert!(worst <= eps);
        }
    }

    #[test]
    fn avoid_target_attains_dp_minimum() {
        let m = SettingMap::mod9();
        let eps = frac(1, 10);
        let t = conditional_table(&Strategy::AvoidTarget { target: TARGET_SETTING }, &m, &eps, 8).unwrap();
        let p0: std::collections::HashMap<Vec<bool>, Rational> = t.into_iter().collect();
        let mask = m.preimage_mask(TARGET_SETTING);
        let mut hit = Rational::zero();
        for byte in 0..=255u8 {
            if !mask[byte as usize] {
                continue;
            }
            let b = byte_to_bits(byte);
            let mut p = Rational::one();
            for i in 0..8 {
                let z = &p0[&b[..i].to_vec()];
                p *= if b[i] { int(1) - z } else { z.clone() };
            }
            hit += p;
        }
        assert_eq!(hit, setting_measure_bounds(&eps, &m, TARGET_SETTING).unwrap().dp_min);
        assert!(hit < frac(1, 64));
    }

    #[test]
    fn sampling_matches_bias() {
        let m = SettingMap::mod9();
        let mut s = SvSource::new(0.1, Strategy::ConstantBias { signs: vec![1] }, &m, 5).unwrap();
        let zeros = s.next_bits(200_000).iter().filter(|&&b| !b).count();
        let f = zeros as f64 / 200_000.0;
        assert!((f - 0.6).abs() < 0.005, "{f}");
        let mut a = SvSource::new(0.0, Strategy::Unbiased, &m, 9).unwrap();
        let mut b = SvSource::new(0.0, Strategy::Unbiased, &m, 9).unwrap();
        assert_eq!(a.next_bits(64), b.next_bits(64));
    }

    #[test]
    fn epsilon_range_checked() {
        let m = SettingMap::mod9();
        assert!(SvSource::new(0.5, Strategy::Unbiased, &m, 0).is_err());
        assert!(SvSource::new(-0.1, Strategy::Unbiased, &m, 0).is_err());
        assert_eq!(exact_epsilon(0.1).unwrap(), frac(1, 10));
    }
}
