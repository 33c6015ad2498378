//! Device construction from specs and seeded Monte Carlo campaigns.

use std::io::Write;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use super::{run_protocol, standard_functional, ProtocolParams, ProtocolRun, Verdict};
use crate::boxes::{
    depolarize, ideal_quantum_box, make_adversarial_device, make_iid_device, AdversarySpec, AnyDevice, Behavior,
    BehaviorJson, BehaviorRef, DeviceSpec,
};
use crate::error::Result;
use crate::ks_bell::{build_ks_model, classical_minimum};
use crate::ns_certify::{attack_box, Sense};
use crate::seed::RunSeeds;
use crate::sv_source::{SourceSpec, SvSource};

fn ideal() -> &'static Behavior {
    static B: OnceLock<Behavior> = OnceLock::new();
    B.get_or_init(|| ideal_quantum_box(&build_ks_model()))
}

fn local_witness() -> &'static Behavior {
    static B: OnceLock<Behavior> = OnceLock::new();
    B.get_or_init(|| Behavior::deterministic(&classical_minimum(standard_functional()).1))
}

pub fn resolve_behavior(r: &BehaviorRef) -> Result<Behavior> {
    Ok(match r {
        BehaviorRef::Ideal => ideal().clone(),
        BehaviorRef::Uniform => Behavior::uniform(),
        BehaviorRef::Depolarized { eta } => depolarize(ideal(), *eta)?,
        BehaviorRef::LocalWitness => local_witness().clone(),
        BehaviorRef::AttackMin => attack_box(Sense::Minimize)?,
        BehaviorRef::AttackMax => attack_box(Sense::Maximize)?,
        BehaviorRef::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let j: BehaviorJson = serde_json::from_str(&text)?;
            j.into_behavior(1e-9)?
        }
    })
}

pub fn build_device(spec: &DeviceSpec) -> Result<AnyDevice> {
    let arc = |r: &BehaviorRef| resolve_behavior(r).map(Arc::new);
    Ok(match spec {
        DeviceSpec::Iid { behavior } => AnyDevice::Iid(make_iid_device(arc(behavior)?)),
        DeviceSpec::SwitchAfter { k, first, second } => {
            AnyDevice::Adversarial(make_adversarial_device(AdversarySpec::SwitchAfter {
                k: *k,
                first: arc(first)?,
                second: arc(second)?,
            })?)
        }
        DeviceSpec::HistoryTrigger { pattern, first, second } => {
            AnyDevice::Adversarial(make_adversarial_device(AdversarySpec::HistoryTrigger {
                pattern: pattern.clone(),
                first: arc(first)?,
                second: arc(second)?,
            })?)
        }
    })
}

/// One protocol run with every random choice fixed by `seeds`. The seed in
/// `source` is replaced by `seeds.source`.
pub fn run_seeded(device: &DeviceSpec, source: &SourceSpec, p: &ProtocolParams, seeds: RunSeeds) -> Result<ProtocolRun> {
    let map = p.setting_map()?;
    let mut dev = build_device(device)?;
    let spec = SourceSpec {
        seed: seeds.source,
        ..source.clone()
    };
    let mut src = SvSource::from_spec(&spec, &map)?;
    run_protocol(&mut dev, &mut src, p, seeds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub ln: f64,
    pub sn: f64,
    pub verdict: Verdict,
    pub bell_count: usize,
    pub tomography_count: usize,
    pub seeds: RunSeeds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub master_seed: u64,
    pub trials: usize,
    pub accepted: usize,
    pub aborted_bell: usize,
    pub aborted_tomography: usize,
    pub accept_rate: f64,
    /// Two-sided 95% Clopper-Pearson interval for the acceptance probability.
    pub accept_ci: (f64, f64),
    pub ln_mean: f64,
    pub ln_std: f64,
    pub sn_mean: f64,
    pub sn_std: f64,
    pub summaries: Vec<TrialSummary>,
}

/// Exact binomial interval at level `1 - alpha`.
pub(crate) fn clopper_pearson(k: usize, n: usize, alpha: f64) -> (f64, f64) {
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

fn mean_std(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let m = v.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        v.map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

/// Runs `trials` independent protocol executions in parallel. Trial `t`
/// uses `RunSeeds::for_trial(master_seed, t)`, so results do not depend on
/// the thread count.
pub fn monte_carlo(
    device: &DeviceSpec,
    source: &SourceSpec,
    p: &ProtocolParams,
    trials: usize,
    master_seed: u64,
) -> Result<Campaign> {
    if trials == 0 {
        return Err(crate::error::invalid("need at least one trial"));
    }
    p.validate()?;
    let summaries = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seeds = RunSeeds::for_trial(master_seed, t as u64);
            let run = run_seeded(device, source, p, seeds)?;
            Ok(TrialSummary {
                trial: t,
                ln: run.l_n,
                sn: run.s_n,
                verdict: run.verdict,
                bell_count: run.bell_count,
                tomography_count: run.tomography_count,
                seeds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |v: Verdict| summaries.iter().filter(|s| s.verdict == v).count();
    let accepted = count(Verdict::Accept);
    let (ln_mean, ln_std) = mean_std(summaries.iter().map(|s| s.ln));
    let (sn_mean, sn_std) = mean_std(summaries.iter().map(|s| s.sn));
    Ok(Campaign {
        master_seed,
        trials,
        accepted,
        aborted_bell: count(Verdict::AbortBell),
        aborted_tomography: count(Verdict::AbortTomography),
        accept_rate: accepted as f64 / trials as f64,
        accept_ci: clopper_pearson(accepted, trials, 0.05),
        ln_mean,
        ln_std,
        sn_mean,
        sn_std,
        summaries,
    })
}

/// CSV with columns `trial,Ln,Sn,verdict,source_seed,device_seed`.
pub fn write_campaign_csv<W: Write>(c: &Campaign, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "Ln", "Sn", "verdict", "source_seed", "device_seed"])?;
    for s in &c.summaries {
        w.write_record([
            s.trial.to_string(),
            format!("{:e}", s.ln),
            format!("{:e}", s.sn),
            s.verdict.to_string(),
            s.seeds.source.to_string(),
            s.seeds.device.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sv_source::Strategy;

    fn unbiased() -> SourceSpec {
        SourceSpec {
            epsilon: 0.0,
            strategy: Strategy::Unbiased,
            seed: 0,
        }
    }

    #[test]
    fn clopper_pearson_known_values() {
        let (lo, hi) = clopper_pearson(0, 10, 0.05);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.30850).abs() < 1e-4);
        let (lo, hi) = clopper_pearson(5, 10, 0.05);
        assert!((lo - 0.18709).abs() < 1e-4);
        assert!((hi - 0.81291).abs() < 1e-4);
    }

    #[test]
    fn campaign_is_reproducible() {
        let p = ProtocolParams {
            n: 2000,
            ..Default::default()
        };
        let dev = DeviceSpec::Iid {
            behavior: BehaviorRef::Uniform,
        };
        let a = monte_carlo(&dev, &unbiased(), &p, 6, 42).unwrap();
        let b = monte_carlo(&dev, &unbiased(), &p, 6, 42).unwrap();
        assert_eq!(a, b);
        // white noise at n = 2000 violates the Bell test almost surely
        assert_eq!(a.aborted_bell, 6);
        let mut buf = Vec::new();
        write_campaign_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trial,Ln,Sn,verdict"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn local_witness_has_four_forbidden_entries() {
        let b = resolve_behavior(&BehaviorRef::LocalWitness).unwrap();
        let raw = crate::boxes::raw_bell_value(&b, standard_functional());
        assert!((raw - 4.0).abs() < 1e-12);
    }
}
