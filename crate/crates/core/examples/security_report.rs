//! Evaluates the security parameters for the default protocol and for a
//! very long run. At practical lengths the failure probability exceeds 1
//! and the headline is flagged vacuous.

use randamp::protocol::{security_report, ProtocolParams};

fn main() {
    for p in [
        ProtocolParams::default(),
        ProtocolParams { n: 30_000_000_000_000, delta: 1.5e-6, mu1: 0.01, kappa: 0.001, ..Default::default() },
    ] {
        let r = security_report(&p).unwrap();
        let h = r.headline(1.0);
        println!("n = {:e}", r.n as f64);
        println!("  mu4 = {:.6e}, gamma = {:.6} ({})", r.mu4, r.gamma, r.gamma_branch);
        println!("  delta1 = {:.4e}, min-entropy = {:.4e} bits, vacuous: {}", r.delta1, r.min_entropy_bits, h.vacuous);
        println!("  {}", h.text);
    }
}
