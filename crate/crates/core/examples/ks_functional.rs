//! Builds the 18-vector Kochen-Specker set and its Bell functional, and
//! shows that the ideal quantum box never triggers the functional.

use randamp::boxes::ideal_quantum_box_exact;
use randamp::ks_bell::{build_bell_functional, build_ks_model, ks_coloring_count, TARGET_OUTCOME, TARGET_SETTING};

fn main() {
    let model = build_ks_model();
    model.check_invariants().expect("orthogonality invariants");
    println!("{} vectors, {} bases", model.vectors().len(), model.bases().len());
    println!("valid 0/1 colorings: {}", ks_coloring_count(&model));

    let f = build_bell_functional(&model);
    println!("|S_B| = {}", f.len());

    let q = ideal_quantum_box_exact(&model);
    println!("ideal box: B.P = {}, P(x*|u*) = {}", q.raw_bell_value(&f), q.prob(TARGET_OUTCOME, TARGET_SETTING));
}
