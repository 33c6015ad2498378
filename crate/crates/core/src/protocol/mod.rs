//! The amplification protocol: rounds, Bell and tomography tests,
//! extraction, security accounting, and Monte Carlo campaigns.

mod campaign;
mod distance;
mod report;
mod transcript;

pub use campaign::{
    build_device, monte_carlo, resolve_behavior, run_seeded, write_campaign_csv, Campaign, TrialSummary,
};
pub use distance::{dc_distance, DistanceReport, JointTable};
pub use report::{security_report, Headline, SecurityReport};
pub use transcript::{read_transcript, replay, write_transcript, ReplayOutcome, Transcript, TranscriptHeader, TranscriptSummary};

use std::fmt;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::boxes::{Behavior, DeviceOracle, SettingMeasure};
use crate::error::{invalid, Error, Result};
use crate::extractor::{extract_run, ExtractorConfig, Extraction};
use crate::ks_bell::{
    build_bell_functional, build_ks_model, entry_index, BellFunctional, OutcomePair, SettingPair, TARGET_OUTCOME,
    TARGET_SETTING,
};
use crate::seed::RunSeeds;
use crate::sv_source::{SettingMap, SvSource};

/// The 504-entry functional of the standard model, built once.
pub fn standard_functional() -> &'static BellFunctional {
    static F: OnceLock<BellFunctional> = OnceLock::new();
    F.get_or_init(|| build_bell_functional(&build_ks_model()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolParams {
    pub n: usize,
    pub epsilon: f64,
    /// Bell-test threshold on `L_n`.
    pub delta: f64,
    /// Tomography threshold on `S_n`.
    pub mu1: f64,
    pub kappa: f64,
    /// Setting map id.
    pub map: String,
    pub extractor: ExtractorConfig,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            n: 100_000,
            epsilon: 0.0,
            delta: 1e-8,
            mu1: 5e-4,
            kappa: 1e-4,
            map: SettingMap::mod9().id,
            extractor: ExtractorConfig::default(),
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        let dmax = select_params(self.epsilon, self.mu1, self.kappa)?;
        if !(self.delta > 0.0 && self.delta < dmax.delta_max) {
            return Err(invalid(format!(
                "delta {} must lie in (0, {}) for eps={}, mu1={}, kappa={}",
                self.delta, dmax.delta_max, self.epsilon, self.mu1, self.kappa
            )));
        }
        SettingMap::by_id(&self.map)?;
        self.extractor.validate()
    }

    pub fn setting_map(&self) -> Result<SettingMap> {
        SettingMap::by_id(&self.map)
    }
}

/// The two terms bounding the Bell threshold and their minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaMax {
    /// `(1/2 - eps)^16 / 8`.
    pub bell_term: f64,
    /// `mu3^2 / 2` with `mu3 = (mu1 - 2 kappa) / (2 (1 - kappa))`.
    pub tomography_term: f64,
    pub delta_max: f64,
}

pub fn select_params(eps: f64, mu1: f64, kappa: f64) -> Result<DeltaMax> {
    if !(0.0..0.5).contains(&eps) {
        return Err(invalid(format!("epsilon {eps} outside [0, 1/2)")));
    }
    if !(mu1 > 0.0 && mu1 <= 1.0) {
        return Err(invalid(format!("mu1 {mu1} outside (0, 1]")));
    }
    if !(kappa > 0.0 && kappa < mu1 / 2.0) {
        return Err(invalid(format!("kappa {kappa} must lie in (0, mu1/2) = (0, {})", mu1 / 2.0)));
    }
    let bell_term = (0.5 - eps).powi(16) / 8.0;
    let mu3 = (mu1 - 2.0 * kappa) / (2.0 * (1.0 - kappa));
    let tomography_term = mu3 * mu3 / 2.0;
    Ok(DeltaMax {
        bell_term,
        tomography_term,
        delta_max: bell_term.min(tomography_term),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    AbortBell,
    AbortTomography,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Accept => "accept",
            Self::AbortBell => "abort_bell",
            Self::AbortTomography => "abort_tomography",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub u: SettingPair,
    pub x: OutcomePair,
}

/// Test statistics of a transcript.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub bell_count: usize,
    pub tomography_count: usize,
    pub l_n: f64,
    pub s_n: f64,
    pub verdict: Verdict,
}

/// Recomputes `L_n`, `S_n` and the verdict from the rounds alone. The Bell
/// test comes first.
pub fn evaluate(rounds: &[Round], delta: f64, mu1: f64) -> Evaluation {
    let mask = standard_functional().mask();
    let mut bell_count = 0;
    let mut tomography_count = 0;
    for r in rounds {
        bell_count += mask[entry_index(r.x, r.u)] as usize;
        tomography_count += (r.u == TARGET_SETTING && r.x == TARGET_OUTCOME) as usize;
    }
    let n = rounds.len() as f64;
    let l_n = bell_count as f64 / n;
    let s_n = tomography_count as f64 / n;
    let verdict = if l_n > delta {
        Verdict::AbortBell
    } else if s_n < mu1 {
        Verdict::AbortTomography
    } else {
        Verdict::Accept
    };
    Evaluation {
        bell_count,
        tomography_count,
        l_n,
        s_n,
        verdict,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub params: ProtocolParams,
    pub seeds: RunSeeds,
    pub rounds: Vec<Round>,
    pub bell_count: usize,
    pub tomography_count: usize,
    pub l_n: f64,
    pub s_n: f64,
    pub verdict: Verdict,
    /// Fresh source bits drawn after acceptance.
    pub t_bits: Option<Vec<bool>>,
    pub extraction: Option<Extraction>,
    /// Why an accepted run produced no extractor output.
    pub extraction_skipped: Option<String>,
}

impl ProtocolRun {
    pub fn evaluation(&self) -> Evaluation {
        Evaluation {
            bell_count: self.bell_count,
            tomography_count: self.tomography_count,
            l_n: self.l_n,
            s_n: self.s_n,
            verdict: self.verdict,
        }
    }
}

/// Runs the protocol. The device is built before any source bit is drawn
/// and sees settings only as they are issued. `source` must be fresh.
pub fn run_protocol(
    device: &mut dyn DeviceOracle,
    source: &mut SvSource,
    p: &ProtocolParams,
    seeds: RunSeeds,
) -> Result<ProtocolRun> {
    p.validate()?;
    if !source.history().is_empty() {
        return Err(invalid("source has already emitted bits"));
    }
    if source.epsilon() != p.epsilon {
        return Err(invalid("source epsilon differs from the protocol's"));
    }
    let map = p.setting_map()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seeds.device);
    let mut rounds = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let u = source.next_setting(&map);
        let x = device.respond(i, u, &mut rng);
        rounds.push(Round { u, x });
    }
    let ev = evaluate(&rounds, p.delta, p.mu1);
    let mut run = ProtocolRun {
        params: p.clone(),
        seeds,
        rounds,
        bell_count: ev.bell_count,
        tomography_count: ev.tomography_count,
        l_n: ev.l_n,
        s_n: ev.s_n,
        verdict: ev.verdict,
        t_bits: None,
        extraction: None,
        extraction_skipped: None,
    };
    if run.verdict == Verdict::Accept {
        let t = source.next_bits(p.n);
        let report = security_report(p)?;
        match extract_run(&run, &t, &p.extractor, p.epsilon, report.min_entropy_bits) {
            Ok(e) => run.extraction = Some(e),
            // too few selected rounds for the requested output length
            Err(Error::InvalidParameter(msg)) => run.extraction_skipped = Some(msg),
            Err(e) => return Err(e),
        }
        run.t_bits = Some(t);
    }
    Ok(run)
}

/// `nu(u*) P(x*|u*)`: the per-round probability of a tomography hit.
pub fn expected_tomography_rate(b: &Behavior, measure: &SettingMeasure) -> f64 {
    measure.weight(TARGET_SETTING) * b.prob(TARGET_OUTCOME, TARGET_SETTING)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{ideal_quantum_box, make_iid_device};
    use crate::sv_source::Strategy;
    use std::sync::Arc;

    #[test]
    fn select_params_examples() {
        let d = select_params(0.1, 0.5, 0.1).unwrap();
        assert!((d.bell_term - 0.4f64.powi(16) / 8.0).abs() < 1e-20);
        assert!((d.bell_term - 5.3687e-8).abs() < 1e-11);
        assert!((d.tomography_term - 1.3889e-2).abs() < 1e-6);
        assert_eq!(d.delta_max, d.bell_term);
        let d = select_params(0.0, 5e-4, 1e-4).unwrap();
        assert!((d.bell_term - 1.9073e-6).abs() < 1e-10);
        assert!((d.delta_max - 1.1252e-8).abs() < 1e-12);
        assert!(select_params(0.0, 5e-4, 2.5e-4).is_err());
    }

    #[test]
    fn default_params_are_valid() {
        ProtocolParams::default().validate().unwrap();
        let bad = ProtocolParams {
            delta: 2e-8,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn tomography_rate_examples() {
        let m = SettingMap::mod9().uniform_measure();
        let q = ideal_quantum_box(&build_ks_model());
        assert!((expected_tomography_rate(&q, &m) - 1.0 / 1024.0).abs() < 1e-15);
        assert!((expected_tomography_rate(&Behavior::uniform(), &m) - 1.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn evaluate_orders_tests() {
        let r = vec![Round {
            u: TARGET_SETTING,
            x: TARGET_OUTCOME,
        }];
        assert_eq!(evaluate(&r, 0.0, 0.5).verdict, Verdict::Accept);
        assert_eq!(evaluate(&r, 0.0, 1.5).verdict, Verdict::AbortTomography);
        // any forbidden outcome at u* trips the Bell test first
        let f = standard_functional();
        let bad = f.forbidden_at(TARGET_SETTING).next().unwrap();
        let r = vec![Round { u: TARGET_SETTING, x: bad }];
        assert_eq!(evaluate(&r, 0.5, 1.5).verdict, Verdict::AbortBell);
    }

    #[test]
    fn small_ideal_run_is_clean() {
        let p = ProtocolParams {
            n: 20_000,
            ..Default::default()
        };
        let map = p.setting_map().unwrap();
        let seeds = RunSeeds::from_master(11);
        let mut dev = make_iid_device(Arc::new(ideal_quantum_box(&build_ks_model())));
        let mut src = SvSource::new(0.0, Strategy::Unbiased, &map, seeds.source).unwrap();
        let run = run_protocol(&mut dev, &mut src, &p, seeds).unwrap();
        assert_eq!(run.bell_count, 0);
        assert_eq!(run.evaluation(), evaluate(&run.rounds, p.delta, p.mu1));
    }

    #[test]
    fn short_accepted_run_skips_extraction() {
        let p = ProtocolParams {
            n: 2000,
            extractor: ExtractorConfig {
                output_bits: 4096,
                ..Default::default()
            },
            ..Default::default()
        };
        let map = p.setting_map().unwrap();
        let seeds = RunSeeds::from_master(3);
        let mut dev = make_iid_device(Arc::new(ideal_quantum_box(&build_ks_model())));
        let mut src = SvSource::new(0.0, Strategy::Unbiased, &map, seeds.source).unwrap();
        let run = run_protocol(&mut dev, &mut src, &p, seeds).unwrap();
        assert_eq!(run.verdict, Verdict::Accept);
        assert!(run.extraction.is_none());
        assert!(run.extraction_skipped.is_some());
    }
}
