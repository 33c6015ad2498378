//! Distance from uniform conditioned on an adversary's side information,
//! for a toy joint table with one leaking input.

use randamp::protocol::{dc_distance, JointTable};

fn main() {
    // |S| = 2, one z, two e values, two inputs w; flattened [w][s][z][e]
    let p = vec![
        0.25, 0.25, 0.25, 0.25, // w = 0: uniform
        0.40, 0.10, 0.10, 0.40, // w = 1: s correlates with e
    ];
    let t = JointTable::new(2, 1, 2, 2, p).unwrap();
    let r = dc_distance(&t).unwrap();
    println!("d_c = {:.3}, d = {:.3}, d <= d_c: {}", r.d_c, r.d, r.relation_holds);
}
