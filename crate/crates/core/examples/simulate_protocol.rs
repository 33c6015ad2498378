//! One protocol run against the ideal device, then a small Monte Carlo
//! campaign against white noise.

use randamp::boxes::{BehaviorRef, DeviceSpec};
use randamp::protocol::{monte_carlo, run_seeded, ProtocolParams};
use randamp::seed::RunSeeds;
use randamp::sv_source::{SourceSpec, Strategy};

fn main() {
    let p = ProtocolParams { n: 20_000, ..Default::default() };
    let src = SourceSpec { epsilon: 0.0, strategy: Strategy::Unbiased, seed: 0 };
    let ideal = DeviceSpec::Iid { behavior: BehaviorRef::Ideal };

    let run = run_seeded(&ideal, &src, &p, RunSeeds::from_master(7)).unwrap();
    println!("ideal: verdict {:?}, L_n = {:.3e}, S_n = {:.4}", run.verdict, run.l_n, run.s_n);
    if let Some(e) = &run.extraction {
        println!("  {} output bits", e.bits.len());
    }

    let noise = DeviceSpec::Iid { behavior: BehaviorRef::Depolarized { eta: 0.05 } };
    let c = monte_carlo(&noise, &src, &p, 20, 1).unwrap();
    println!(
        "eta 0.05: {}/{} accepted, {} Bell aborts, mean L_n {:.4}",
        c.accepted, c.trials, c.aborted_bell, c.ln_mean
    );
}
