//! Exhaustive check that no output sequence is likelier than gamma^|K|
//! when every round in K has a conditional max probability of gamma.

use randamp::extractor::{verify_sequence_bound, ChainedDevice, ProductDevice};
use randamp::rational::{frac, to_f64};

fn main() {
    let gamma = frac(3, 4);
    let k = vec![0, 2, 4];
    let product = ProductDevice::with_peaks(6, &k, &gamma, 3).unwrap();
    let chained = ChainedDevice { k: k.clone(), gamma: gamma.clone(), alphabet: 3 };
    for (name, c) in [
        ("product", verify_sequence_bound(&product, 6, &k, &gamma).unwrap()),
        ("chained", verify_sequence_bound(&chained, 6, &k, &gamma).unwrap()),
    ] {
        println!(
            "{name}: max sequence probability {:.6} vs bound {:.6}, holds {}",
            to_f64(&c.max_sequence_probability),
            to_f64(&c.bound),
            c.holds
        );
    }
}
