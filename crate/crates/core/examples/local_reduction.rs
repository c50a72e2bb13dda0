// Tate's algorithm on a Frey curve at the primes above 2, 3 and d.

use qcurves::ellcurve::{Equation, FreyInput};
use qcurves::localred::tate;
use qcurves::quadfield::split_prime;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for input in [FreyInput::new(Equation::Eq24p, 7, 1, 2), FreyInput::new(Equation::Benchen, 5, 2, 1)] {
        let c = input.curve()?;
        println!("{:?} d={} (A,B)=({},{}):", input.equation, input.d, input.a, input.b);
        for p in [2u64, 3, input.d as u64] {
            for pr in split_prime(&c.field, p).primes_above {
                let r = tate(&c, &pr);
                println!("  {:<16} type {:<6} f = {}  v(Δmin) = {}", pr.ideal.to_string(), r.kodaira.to_string(), r.f, r.vdisc_min);
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
