// The cocycle c on Gal(L/Q) and the maps β trivializing it, in all three
// group shapes, plus the full table check with a mutated entry.

use qcurves::cocycle::{verify_trivialization, Case, KleinElement};
use qcurves::tables::{first_failure, verify_tables, TableInputs};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for case in Case::ALL {
        let r = verify_trivialization(case);
        println!("{:<22} order {:>2}: {} pairs, passed = {}", case.label(), r.group_order, r.pairs_checked, r.passed());
    }
    let mut inputs = TableInputs::default();
    inputs.cocycle = inputs.cocycle.with_entry(KleinElement::SIGMA_D, KleinElement::SIGMA_2, -1);
    let checks = verify_tables(&inputs);
    println!("mutated c(σ_d, σ₂): first failing table = {}", first_failure(&checks).map_or("none", |c| c.name.as_str()));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
