//! Solves the no-signaling LP for a few Bell caps and checks the dual
//! certificates in exact arithmetic.
//!
//! `cargo run --release --example certify_lp -- 0 0.1 0.25`

use randamp::ks_bell::{TARGET_OUTCOME, TARGET_SETTING};
use randamp::ns_certify::{build_lp, lp_bound_formula, solve_lp, verify_certificate, Sense, SolveMode};
use randamp::protocol::standard_functional;
use randamp::rational::parse_decimal;

fn main() {
    let mut caps: Vec<String> = std::env::args().skip(1).collect();
    if caps.is_empty() {
        caps = vec!["0".into(), "0.1".into()];
    }
    for c in caps {
        let dt = parse_decimal(&c).expect("decimal cap");
        let lp = build_lp(standard_functional(), dt.clone(), (TARGET_OUTCOME, TARGET_SETTING), Sense::Maximize).unwrap();
        let sol = solve_lp(&lp, SolveMode::Exact).unwrap();
        println!(
            "cap {c}: max P(x*|u*) = {} (~{:.6}), bound {}, certificate verifies: {}",
            sol.optimum,
            sol.optimum_f64,
            lp_bound_formula(&dt),
            verify_certificate(&lp, &sol.dual)
        );
    }
}
