//! Two-party behaviors and the devices that play them.

mod behavior;
mod device;

pub use behavior::{
    bell_value, depolarize, ideal_quantum_box, ideal_quantum_box_exact, raw_bell_value,
    sample_from_row, sample_outcome, validate_behavior, Behavior, BehaviorJson, ExactBehavior,
    SettingMeasure, ValidationReport,
};
pub use device::{
    make_adversarial_device, make_iid_device, run_settings, AdversarialDevice, AdversarySpec,
    AnyDevice, BehaviorRef, DeviceOracle, DeviceSpec, HistoryTriggerDevice, IidDevice,
    SwitchAfterDevice,
};
