// ε and the splitting character χ with χ² = ε∘N, checked on ideals.

use qcurves::heckechar::{build_chi, build_epsilon, verify_character};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for (d, t) in [(5u64, 2u64), (7, 2), (6, 3)] {
        let eps = build_epsilon(d, t)?;
        let chi = build_chi(d, t)?;
        println!(
            "d={} t={}: ε conductor {} order {}, χ conductor norm {} order {}, ramified above {:?}",
            d,
            t,
            eps.conductor(),
            eps.order(),
            chi.conductor_norm(),
            chi.order(),
            chi.ramified_primes()
        );
        let r = verify_character(&chi, &eps, 300);
        println!("  {}", r.summary());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
