// Arithmetic in K = Q(√−d): splitting of small primes, the class group and
// principal generators.

use qcurves::quadfield::{class_group, principal_generator, split_prime, Field, QuadIdeal};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for d in [5i64, 6, 7] {
        let f = Field::new(d)?;
        let cg = class_group(&f);
        println!("Q(√−{}): disc {}, class number {}", d, f.disc, cg.h);
        for p in [2u64, 3, 5, 7, 11] {
            let s = split_prime(&f, p);
            let primes: Vec<String> = s.primes_above.iter().map(|pr| pr.ideal.to_string()).collect();
            println!("  {:>2}: {:?} {}", p, s.kind, primes.join(" "));
        }
        // (1 + √−d) is principal by construction
        let i = QuadIdeal::principal(&f, &f.elt(1, 1));
        let g = principal_generator(&f, &i).ok_or("no generator found")?;
        println!("  generator of {}: {}", i, g);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
