//! Every deterministic (local) strategy scores at least 4 on the functional.

use randamp::ks_bell::classical_minimum;
use randamp::protocol::standard_functional;
use randamp::ks_bell::SettingPair;

fn main() {
    let f = standard_functional();
    let (min, strat) = classical_minimum(f);
    println!("classical minimum of B.P: {min}");
    for u in SettingPair::all().take(9) {
        let x = strat.outcome(u);
        println!("  setting ({},{}) -> outcome ({},{})", u.alice, u.bob, x.alice, x.bob);
    }
}
