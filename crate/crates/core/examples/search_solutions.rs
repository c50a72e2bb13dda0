// Small solutions with non-prime exponents allowed.

use qcurves::ellcurve::Equation;
use qcurves::search::scan;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for (eq, d, max) in [(Equation::Benchen, 7u64, 200u64), (Equation::Eq24p, 6, 20), (Equation::Benchen, 5, 2000)] {
        println!("{} d={} box {}:", eq.name(), d, max);
        for h in scan(eq, d, max, 5)?.into_iter().filter(|h| h.primitive && !h.trivial) {
            println!("  ({}, {}) -> {}^{}  exponents {:?}", h.a, h.b, h.c, h.p, h.exponents);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
