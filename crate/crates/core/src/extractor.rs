//! Inner-product two-source extraction, uniformity testing, and the
//! min-entropy accounting for sequences of conditional boxes.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::boxes::ideal_quantum_box;
use crate::error::{invalid, Error, Result};
use crate::ks_bell::{build_ks_model, OutcomePair, SettingPair, TARGET_SETTING};
use crate::protocol::{ProtocolRun, Verdict};
use crate::rational::{self, Rational};

/// Which transcript rounds feed the first extractor source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictionRule {
    /// Only rounds with `u = u*`.
    #[default]
    TargetRounds,
    AllRounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractorConfig {
    /// Output length `m`.
    pub output_bits: usize,
    /// Common block length `L`; `None` takes the shorter of the two inputs.
    pub block_length: Option<usize>,
    pub rule: RestrictionRule,
    /// `log2(1/xi)` for the target error `xi`.
    pub error_bits: f64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self {
            output_bits: 64,
            block_length: None,
            rule: RestrictionRule::TargetRounds,
            error_bits: 32.0,
        }
    }
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.output_bits == 0 {
            return Err(invalid("extractor output length must be positive"));
        }
        if let Some(l) = self.block_length {
            if self.output_bits > l {
                return Err(invalid(format!("output length {} exceeds block length {l}", self.output_bits)));
            }
        }
        if !(self.error_bits >= 0.0) {
            return Err(invalid("error_bits must be nonnegative"));
        }
        Ok(())
    }
}

fn fit(v: &[bool], l: usize) -> Vec<bool> {
    let mut out: Vec<bool> = v.iter().copied().take(l).collect();
    out.resize(l, false);
    out
}

/// Bit `j` of the output is `<x, t rotated left by j> mod 2`, after both
/// inputs are truncated or zero-padded to `l` bits.
pub fn extract(x: &[bool], t: &[bool], m: usize, l: usize) -> Result<Vec<bool>> {
    if m > l {
        return Err(invalid(format!("output length {m} exceeds block length {l}")));
    }
    let (x, t) = (fit(x, l), fit(t, l));
    let ones: Vec<usize> = (0..l).filter(|&i| x[i]).collect();
    Ok((0..m)
        .map(|j| ones.iter().fold(false, |acc, &i| acc ^ t[(i + j) % l]))
        .collect())
}

/// 2-bit MSB-first encodings of both outcomes, Alice first.
pub fn outcome_bits(x: OutcomePair) -> [bool; 4] {
    let a = x.alice - 1;
    let b = x.bob - 1;
    [a & 2 != 0, a & 1 != 0, b & 2 != 0, b & 1 != 0]
}

/// Bits of the accepted transcript handed to the extractor.
pub fn transcript_to_source(run: &ProtocolRun, rule: RestrictionRule) -> Result<Vec<bool>> {
    if run.verdict != Verdict::Accept {
        return Err(Error::Precondition(format!("run was not accepted ({})", run.verdict)));
    }
    let bits: Vec<bool> = run
        .rounds
        .iter()
        .filter(|r| rule == RestrictionRule::AllRounds || r.u == TARGET_SETTING)
        .flat_map(|r| outcome_bits(r.x))
        .collect();
    if bits.is_empty() {
        return Err(Error::Precondition("no rounds selected".into()));
    }
    Ok(bits)
}

/// Min-entropy per bit of the selected transcript bits for the honest
/// (ideal) device: `-log2(max_x P(x|u)) / 4`, worst over selected settings.
pub fn honest_source_rate(rule: RestrictionRule) -> f64 {
    let q = ideal_quantum_box(&build_ks_model());
    let rate = |u: SettingPair| -q.row(u).iter().cloned().fold(0.0, f64::max).log2() / 4.0;
    match rule {
        RestrictionRule::TargetRounds => rate(TARGET_SETTING),
        RestrictionRule::AllRounds => SettingPair::all().map(rate).fold(f64::INFINITY, f64::min),
    }
}

/// Min-entropy per bit of an epsilon-SV stream.
pub fn sv_rate(eps: f64) -> f64 {
    -(0.5 + eps).log2()
}

/// `rate(X) + rate(T) > 1 + (2 log2(1/xi) + m) / L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub rate_x: f64,
    pub rate_t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub met: bool,
}

pub fn validity(rate_x: f64, rate_t: f64, m: usize, l: usize, error_bits: f64) -> Validity {
    let lhs = rate_x + rate_t;
    let rhs = 1.0 + (2.0 * error_bits + m as f64) / l as f64;
    Validity {
        rate_x,
        rate_t,
        lhs,
        rhs,
        met: lhs > rhs,
    }
}

/// Extraction result with its sidecar data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub bits: Vec<bool>,
    pub sidecar: Sidecar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub rule: RestrictionRule,
    pub x_len: usize,
    pub t_len: usize,
    /// Condition evaluated with the honest-device rate of the transcript bits.
    pub honest: Validity,
    /// Condition evaluated with the certified rate (min-entropy bound per bit).
    pub certified: Validity,
    #[serde(rename = "validity-condition-met")]
    pub validity_condition_met: bool,
}

/// Extracts from an accepted run and its `t` bits. `certified_entropy` is
/// the min-entropy bound (bits) the security report grants the transcript.
pub fn extract_run(run: &ProtocolRun, t: &[bool], cfg: &ExtractorConfig, eps: f64, certified_entropy: f64) -> Result<Extraction> {
    cfg.validate()?;
    let x = transcript_to_source(run, cfg.rule)?;
    let l = cfg.block_length.unwrap_or(x.len().min(t.len()));
    if cfg.output_bits > l {
        return Err(invalid(format!("output length {} exceeds block length {l}", cfg.output_bits)));
    }
    let bits = extract(&x, t, cfg.output_bits, l)?;
    let rate_t = sv_rate(eps);
    let honest = validity(honest_source_rate(cfg.rule), rate_t, cfg.output_bits, l, cfg.error_bits);
    let certified_rate = (certified_entropy / x.len() as f64).min(1.0);
    let certified = validity(certified_rate, rate_t, cfg.output_bits, l, cfg.error_bits);
    Ok(Extraction {
        bits,
        sidecar: Sidecar {
            m: cfg.output_bits,
            l,
            rule: cfg.rule,
            x_len: x.len(),
            t_len: t.len(),
            validity_condition_met: honest.met,
            honest,
            certified,
        },
    })
}

/// Packs bits MSB-first and hex-encodes them.
pub fn bits_to_hex(bits: &[bool]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b as u8) << (7 - i)))
        .collect();
    hex::encode(bytes)
}

pub fn hex_to_bits(s: &str, len: usize) -> Result<Vec<bool>> {
    let bytes = hex::decode(s.trim()).map_err(|e| invalid(format!("bad hex: {e}")))?;
    if bytes.len() * 8 < len {
        return Err(invalid("hex string shorter than the stated length"));
    }
    Ok((0..len).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformityReport {
    pub samples: usize,
    /// `P(bit j = 1) - 1/2`.
    pub bias: Vec<f64>,
    /// Bits entering the joint test (at most 8).
    pub joint_bits: usize,
    pub chi2: f64,
    pub p_value: f64,
}

pub const MIN_UNIFORMITY_SAMPLES: usize = 1000;

/// Per-bit bias and a chi-square test of the joint law of the first
/// `min(m, 8)` bits.
pub fn uniformity_test(samples: &[Vec<bool>]) -> Result<UniformityReport> {
    if samples.len() < MIN_UNIFORMITY_SAMPLES {
        return Err(invalid(format!("need at least {MIN_UNIFORMITY_SAMPLES} samples, got {}", samples.len())));
    }
    let m = samples[0].len();
    if m == 0 || samples.iter().any(|s| s.len() != m) {
        return Err(invalid("samples must share a positive length"));
    }
    let n = samples.len() as f64;
    let bias = (0..m)
        .map(|j| samples.iter().filter(|s| s[j]).count() as f64 / n - 0.5)
        .collect();
    let k = m.min(8);
    let cells = 1usize << k;
    let mut counts = vec![0usize; cells];
    for s in samples {
        counts[s[..k].iter().fold(0usize, |acc, &b| acc << 1 | b as usize)] += 1;
    }
    let expected = n / cells as f64;
    let chi2 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>();
    let dist = ChiSquared::new((cells - 1) as f64).map_err(|e| invalid(e.to_string()))?;
    Ok(UniformityReport {
        samples: samples.len(),
        bias,
        joint_bits: k,
        chi2,
        p_value: 1.0 - dist.cdf(chi2),
    })
}

/// `gamma^|K|`.
pub fn sequence_bound(k: usize, gamma: &Rational) -> Result<Rational> {
    if gamma <= &Rational::zero() || gamma >= &Rational::one() {
        return Err(invalid("gamma must lie in (0, 1)"));
    }
    Ok(rational::pow(gamma, k as u32))
}

/// A device over a finite alphabet whose round-`i` output law may depend
/// on all earlier outputs (and on nothing later).
pub trait TonsDevice {
    fn alphabet(&self) -> usize;
    fn conditional(&self, round: usize, history: &[usize]) -> Vec<Rational>;
}

/// Independent rounds with fixed per-round laws.
pub struct ProductDevice {
    pub rounds: Vec<Vec<Rational>>,
}

impl ProductDevice {
    /// Max probability `gamma` on rounds in `k`, a point mass elsewhere.
    pub fn with_peaks(n: usize, k: &[usize], gamma: &Rational, alphabet: usize) -> Result<Self> {
        if alphabet < 2 || gamma * rational::int(alphabet as i64) < Rational::one() {
            return Err(invalid("gamma must be at least 1/alphabet"));
        }
        let rest = (Rational::one() - gamma) / rational::int(alphabet as i64 - 1);
        let rounds = (0..n)
            .map(|i| {
                let mut p = vec![Rational::zero(); alphabet];
                if k.contains(&i) {
                    p[0] = gamma.clone();
                    for v in &mut p[1..] {
                        *v = rest.clone();
                    }
                } else {
                    p[0] = Rational::one();
                }
                p
            })
            .collect();
        Ok(Self { rounds })
    }
}

impl TonsDevice for ProductDevice {
    fn alphabet(&self) -> usize {
        self.rounds[0].len()
    }
    fn conditional(&self, round: usize, _: &[usize]) -> Vec<Rational> {
        self.rounds[round].clone()
    }
}

/// History-dependent device: on rounds in `k` the favored output is the
/// sum of past outputs mod the alphabet, with probability `gamma`; other
/// rounds play a history-dependent law with no cap.
pub struct ChainedDevice {
    pub k: Vec<usize>,
    pub gamma: Rational,
    pub alphabet: usize,
}

impl TonsDevice for ChainedDevice {
    fn alphabet(&self) -> usize {
        self.alphabet
    }
    fn conditional(&self, round: usize, history: &[usize]) -> Vec<Rational> {
        let a = self.alphabet;
        let s = history.iter().sum::<usize>();
        let mut p = vec![Rational::zero(); a];
        if self.k.contains(&round) {
            let rest = (Rational::one() - &self.gamma) / rational::int(a as i64 - 1);
            for (o, v) in p.iter_mut().enumerate() {
                *v = if o == s % a { self.gamma.clone() } else { rest.clone() };
            }
        } else if s % 2 == 0 {
            p[round % a] = Rational::one();
        } else {
            p[0] = rational::frac(2, 3);
            p[1] = rational::frac(1, 3);
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceBoundCheck {
    pub max_sequence_probability: Rational,
    pub bound: Rational,
    /// Every conditional law on a round in `K` has max at most `gamma`.
    pub premise: bool,
    pub holds: bool,
}

/// Exhaustive evaluation over all output sequences of length `n <= 10`.
pub fn verify_sequence_bound(device: &dyn TonsDevice, n: usize, k: &[usize], gamma: &Rational) -> Result<SequenceBoundCheck> {
    if n > 10 {
        return Err(invalid("exhaustive evaluation is limited to n <= 10"));
    }
    let bound = sequence_bound(k.len(), gamma)?;
    let mut premise = true;
    let mut best = Rational::zero();
    let mut history = Vec::with_capacity(n);
    walk(device, n, k, gamma, &mut history, Rational::one(), &mut best, &mut premise);
    Ok(SequenceBoundCheck {
        holds: best <= bound,
        max_sequence_probability: best,
        bound,
        premise,
    })
}

#[allow(clippy::too_many_arguments)]
fn walk(
    d: &dyn TonsDevice,
    n: usize,
    k: &[usize],
    gamma: &Rational,
    history: &mut Vec<usize>,
    p: Rational,
    best: &mut Rational,
    premise: &mut bool,
) {
    let round = history.len();
    if round == n {
        if p > *best {
            *best = p;
        }
        return;
    }
    let law = d.conditional(round, history);
    if k.contains(&round) && law.iter().any(|q| q > gamma) {
        *premise = false;
    }
    for (o, q) in law.iter().enumerate() {
        if q.is_zero() {
            continue;
        }
        history.push(o);
        walk(d, n, k, gamma, history, &p * q, best, premise);
        history.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn extract_examples() {
        assert_eq!(extract(&bits("1010"), &bits("1100"), 1, 4).unwrap(), bits("1"));
        assert_eq!(extract(&bits("1010"), &bits("1100"), 2, 4).unwrap(), bits("11"));
        assert_eq!(extract(&bits("0000"), &bits("1101"), 4, 4).unwrap(), bits("0000"));
        assert!(extract(&bits("1010"), &bits("1100"), 5, 4).is_err());
        // padding and truncation
        assert_eq!(extract(&bits("1"), &bits("110011"), 2, 4).unwrap(), bits("11"));
    }

    #[test]
    fn hex_round_trip() {
        let b = bits("1010000111");
        let h = bits_to_hex(&b);
        assert_eq!(h, "a1c0");
        assert_eq!(hex_to_bits(&h, 10).unwrap(), b);
        assert!(hex_to_bits("zz", 4).is_err());
    }

    #[test]
    fn outcome_encoding() {
        assert_eq!(outcome_bits(OutcomePair::new(1, 3)), [false, false, true, false]);
        assert_eq!(outcome_bits(OutcomePair::new(4, 4)), [true; 4]);
    }

    #[test]
    fn honest_rate_is_half() {
        assert_eq!(honest_source_rate(RestrictionRule::TargetRounds), 0.5);
        assert_eq!(honest_source_rate(RestrictionRule::AllRounds), 0.5);
        assert_eq!(sv_rate(0.0), 1.0);
    }

    #[test]
    fn correlated_sources_are_biased() {
        // x = t over all 16 four-bit strings: bit 0 is the parity of x and
        // stays balanced, bit 1 is 1 on only 4 of 16 inputs
        let mut ones = [0usize; 2];
        for v in 0..16u8 {
            let x: Vec<bool> = (0..4).map(|i| v >> (3 - i) & 1 == 1).collect();
            let out = extract(&x, &x, 2, 4).unwrap();
            ones[0] += out[0] as usize;
            ones[1] += out[1] as usize;
        }
        assert_eq!(ones, [8, 4]);
        // t the complement of x: the output is constant 0
        for v in 0..16u8 {
            let x: Vec<bool> = (0..4).map(|i| v >> (3 - i) & 1 == 1).collect();
            let t: Vec<bool> = x.iter().map(|b| !b).collect();
            assert_eq!(extract(&x, &t, 1, 4).unwrap(), vec![false]);
        }
    }

    #[test]
    fn sequence_bound_examples() {
        assert_eq!(sequence_bound(8, &frac(3, 4)).unwrap(), rational::pow(&frac(3, 4), 8));
        assert!((rational::to_f64(&sequence_bound(8, &frac(3, 4)).unwrap()) - 0.100113).abs() < 1e-6);
        assert_eq!(sequence_bound(0, &frac(3, 4)).unwrap(), Rational::one());
        assert!(sequence_bound(1, &Rational::one()).is_err());
    }

    #[test]
    fn product_device_attains_bound() {
        let g = frac(3, 4);
        let k = [0, 2, 3];
        let d = ProductDevice::with_peaks(5, &k, &g, 4).unwrap();
        let c = verify_sequence_bound(&d, 5, &k, &g).unwrap();
        assert!(c.premise && c.holds);
        assert_eq!(c.max_sequence_probability, c.bound);
    }

    #[test]
    fn uniformity_needs_samples() {
        assert!(uniformity_test(&vec![vec![true]; 10]).is_err());
    }
}
