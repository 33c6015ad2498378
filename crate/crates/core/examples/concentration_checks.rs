//! Empirical frequencies of the martingale and Chernoff tail events next
//! to their analytic bounds.

use randamp::bounds::verification_suite;

fn main() {
    for c in verification_suite(&[100, 1000], 5_000, 2_000, 11).unwrap() {
        println!(
            "{:<28} n={:<5} freq {:.4} bound {:.4} {}",
            c.name,
            c.n,
            c.frequency,
            c.bound,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
}
