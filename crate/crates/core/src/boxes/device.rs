//! Stateful devices queried round by round.
//!
//! A device only ever sees the settings of the current and earlier rounds,
//! so time-ordered no-signaling holds by construction. Devices own no
//! handle to any source object, and the protocol builds the device before
//! drawing a single source bit.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::behavior::{sample_from_row, Behavior};
use crate::error::{invalid, Result};
use crate::ks_bell::{OutcomePair, SettingPair, NUM_OUTCOME_PAIRS};

/// Round-by-round device oracle.
pub trait DeviceOracle: Send {
    /// Outcome distribution of round `round` (0-based) for `setting`, given
    /// everything committed so far.
    fn round_distribution(&self, round: usize, setting: SettingPair) -> [f64; NUM_OUTCOME_PAIRS];

    /// Records the round's setting and outcome in the device memory.
    fn commit(&mut self, round: usize, setting: SettingPair, outcome: OutcomePair);

    fn respond(&mut self, round: usize, setting: SettingPair, rng: &mut dyn rand::RngCore) -> OutcomePair {
        let row = self.round_distribution(round, setting);
        let x = sample_from_row(&row, rng);
        self.commit(round, setting, x);
        x
    }
}

fn row_array(b: &Behavior, u: SettingPair) -> [f64; NUM_OUTCOME_PAIRS] {
    let mut out = [0.0; NUM_OUTCOME_PAIRS];
    out.copy_from_slice(b.row(u));
    out
}

/// Plays the same behavior every round.
#[derive(Clone, Debug)]
pub struct IidDevice {
    behavior: Arc<Behavior>,
}

impl DeviceOracle for IidDevice {
    fn round_distribution(&self, _round: usize, setting: SettingPair) -> [f64; NUM_OUTCOME_PAIRS] {
        row_array(&self.behavior, setting)
    }

    fn commit(&mut self, _: usize, _: SettingPair, _: OutcomePair) {}
}

pub fn make_iid_device(b: Arc<Behavior>) -> IidDevice {
    IidDevice { behavior: b }
}

/// Adversarial device recipes.
#[derive(Clone, Debug)]
pub enum AdversarySpec {
    /// `first` for rounds `0..k`, `second` afterwards.
    SwitchAfter {
        k: usize,
        first: Arc<Behavior>,
        second: Arc<Behavior>,
    },
    /// `first` until the device's own past settings end with `pattern`,
    /// `second` from the next round on.
    HistoryTrigger {
        pattern: Vec<SettingPair>,
        first: Arc<Behavior>,
        second: Arc<Behavior>,
    },
}

#[derive(Clone, Debug)]
pub struct SwitchAfterDevice {
    k: usize,
    first: Arc<Behavior>,
    second: Arc<Behavior>,
}

impl DeviceOracle for SwitchAfterDevice {
    fn round_distribution(&self, round: usize, setting: SettingPair) -> [f64; NUM_OUTCOME_PAIRS] {
        let b = if round < self.k { &self.first } else { &self.second };
        row_array(b, setting)
    }

    fn commit(&mut self, _: usize, _: SettingPair, _: OutcomePair) {}
}

#[derive(Clone, Debug)]
pub struct HistoryTriggerDevice {
    pattern: Vec<SettingPair>,
    first: Arc<Behavior>,
    second: Arc<Behavior>,
    recent: VecDeque<SettingPair>,
    triggered: bool,
}

impl HistoryTriggerDevice {
    pub fn triggered(&self) -> bool {
        self.triggered
    }
}

impl DeviceOracle for HistoryTriggerDevice {
    fn round_distribution(&self, _round: usize, setting: SettingPair) -> [f64; NUM_OUTCOME_PAIRS] {
        let b = if self.triggered { &self.second } else { &self.first };
        row_array(b, setting)
    }

    fn commit(&mut self, _: usize, setting: SettingPair, _: OutcomePair) {
        if self.triggered {
            return;
        }
        self.recent.push_back(setting);
        if self.recent.len() > self.pattern.len() {
            self.recent.pop_front();
        }
        if self.recent.iter().eq(self.pattern.iter()) {
            self.triggered = true;
        }
    }
}

pub enum AdversarialDevice {
    SwitchAfter(SwitchAfterDevice),
    HistoryTrigger(HistoryTriggerDevice),
}

impl DeviceOracle for AdversarialDevice {
    fn round_distribution(&self, round: usize, setting: SettingPair) -> [f64; NUM_OUTCOME_PAIRS] {
        match self {
            Self::SwitchAfter(d) => d.round_distribution(round, setting),
            Self::HistoryTrigger(d) => d.round_distribution(round, setting),
        }
    }

    fn commit(&mut self, round: usize, setting: SettingPair, outcome: OutcomePair) {
        match self {
            Self::SwitchAfter(d) => d.commit(round, setting, outcome),
            Self::HistoryTrigger(d) => d.commit(round, setting, outcome),
        }
    }
}

pub fn make_adversarial_device(spec: AdversarySpec) -> Result<AdversarialDevice> {
    Ok(match spec {
        AdversarySpec::SwitchAfter { k, first, second } => {
            AdversarialDevice::SwitchAfter(SwitchAfterDevice { k, first, second })
        }
        AdversarySpec::HistoryTrigger {
            pattern,
            first,
            second,
        } => {
            if pattern.is_empty() {
                return Err(invalid("history trigger pattern must be non-empty"));
            }
            AdversarialDevice::HistoryTrigger(HistoryTriggerDevice {
                recent: VecDeque::with_capacity(pattern.len()),
                pattern,
                first,
                second,
                triggered: false,
            })
        }
    })
}

/// Named behaviors a device spec may refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorRef {
    /// Maximally entangled state with the Kochen-Specker measurements.
    Ideal,
    /// Every outcome with probability 1/16.
    Uniform,
    /// Ideal box mixed with white noise at level `eta`.
    Depolarized { eta: f64 },
    /// Optimal classical strategy.
    LocalWitness,
    /// No-signaling box with zero Bell value minimizing `P(x*|u*)`.
    AttackMin,
    /// No-signaling box with zero Bell value maximizing `P(x*|u*)`.
    AttackMax,
    /// Behavior read from a JSON file.
    File { path: String },
}

/// Serializable device description, resolved by the protocol layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceSpec {
    Iid { behavior: BehaviorRef },
    SwitchAfter {
        k: usize,
        first: BehaviorRef,
        second: BehaviorRef,
    },
    HistoryTrigger {
        pattern: Vec<SettingPair>,
        first: BehaviorRef,
        second: BehaviorRef,
    },
}

/// Either kind of device behind one type.
pub enum AnyDevice {
    Iid(IidDevice),
    Adversarial(AdversarialDevice),
}

impl DeviceOracle for AnyDevice {
    fn round_distribution(&self, round: usize, setting: SettingPair) -> [f64; NUM_OUTCOME_PAIRS] {
        match self {
            Self::Iid(d) => d.round_distribution(round, setting),
            Self::Adversarial(d) => d.round_distribution(round, setting),
        }
    }

    fn commit(&mut self, round: usize, setting: SettingPair, outcome: OutcomePair) {
        match self {
            Self::Iid(d) => d.commit(round, setting, outcome),
            Self::Adversarial(d) => d.commit(round, setting, outcome),
        }
    }
}

/// Drives a device through a fixed settings sequence; used by replay tests.
pub fn run_settings<D: DeviceOracle + ?Sized, R: Rng>(
    device: &mut D,
    settings: &[SettingPair],
    rng: &mut R,
) -> Vec<OutcomePair> {
    settings
        .iter()
        .enumerate()
        .map(|(i, &u)| device.respond(i, u, rng))
        .collect()
}
