//! The two-source extractor on random inputs: per-bit bias and a joint
//! chi-square test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use randamp::extractor::{bits_to_hex, extract, uniformity_test};

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut draw = |l: usize| (0..l).map(|_| rng.gen::<bool>()).collect::<Vec<bool>>();
    let (x, t) = (draw(32), draw(32));
    println!("x = {}, t = {}, Ext = {}", bits_to_hex(&x), bits_to_hex(&t), bits_to_hex(&extract(&x, &t, 16, 32).unwrap()));

    let samples: Vec<Vec<bool>> = (0..20_000).map(|_| extract(&draw(32), &draw(32), 16, 32).unwrap()).collect();
    let r = uniformity_test(&samples).unwrap();
    let worst = r.bias.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    println!("max |bias| {worst:.4}, chi2 on {} bits = {:.1} (p = {:.3})", r.joint_bits, r.chi2, r.p_value);
}
