//! Draws settings from a biased Santha-Vazirani source and compares the
//! exact worst case for avoiding the target setting with zeta^k.

use randamp::ks_bell::TARGET_SETTING;
use randamp::rational::{parse_decimal, to_f64};
use randamp::sv_source::{sv_chernoff_oracle, SettingMap, Strategy, SvSource};

fn main() {
    let map = SettingMap::mod9();
    let mut src = SvSource::new(0.2, Strategy::AvoidTarget { target: TARGET_SETTING }, &map, 42).unwrap();
    let n = 20_000;
    let hits = (0..n).filter(|_| src.next_setting(&map) == TARGET_SETTING).count();
    println!("eps 0.2, avoid-target: u* in {hits}/{n} rounds (unbiased rate {:.4})", map.preimages(TARGET_SETTING) as f64 / 256.0);

    let eps = parse_decimal("0.2").unwrap();
    for k in [1, 2, 5] {
        let o = sv_chernoff_oracle(&eps, &map, k).unwrap();
        println!("k={k}: max Pr(no u*) = {:.6} <= zeta^k = {:.6}", to_f64(&o.exact_max), to_f64(&o.zeta_bound));
    }
}
