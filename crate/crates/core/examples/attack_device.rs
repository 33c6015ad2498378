//! A no-signaling attack box that passes the Bell test perfectly but never
//! outputs x* at u*: the tomography test is what catches it.

use randamp::boxes::{raw_bell_value, BehaviorRef, DeviceSpec};
use randamp::ks_bell::{TARGET_OUTCOME, TARGET_SETTING};
use randamp::ns_certify::{attack_box, Sense};
use randamp::protocol::{monte_carlo, standard_functional, ProtocolParams};
use randamp::sv_source::{SourceSpec, Strategy};

fn main() {
    let b = attack_box(Sense::Minimize).unwrap();
    println!(
        "attack box: B.P = {:.2e}, P(x*|u*) = {:.2e}",
        raw_bell_value(&b, standard_functional()),
        b.prob(TARGET_OUTCOME, TARGET_SETTING)
    );
    let p = ProtocolParams { n: 20_000, ..Default::default() };
    let src = SourceSpec { epsilon: 0.0, strategy: Strategy::Unbiased, seed: 0 };
    let c = monte_carlo(&DeviceSpec::Iid { behavior: BehaviorRef::AttackMin }, &src, &p, 20, 2).unwrap();
    println!("{}/{} runs aborted by tomography, {} by the Bell test", c.aborted_tomography, c.trials, c.aborted_bell);
}
