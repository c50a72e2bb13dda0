// Levels and Nebentypus of the newforms attached to hypothetical solutions.

use qcurves::descent::level_candidates;
use qcurves::ellcurve::Equation;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    for eq in [Equation::Eq24p, Equation::Benchen] {
        for d in [5u64, 6, 7] {
            let dd = level_candidates(eq, d)?;
            let levels: Vec<String> = dd.level_candidates.iter().map(|l| l.factored.clone()).collect();
            println!("{} d={}: ε conductor {}, levels {}", eq.name(), d, dd.epsilon.conductor, levels.join(", "));
        }
    }
    let d2 = level_candidates(Equation::Benchen, 2)?;
    println!("benchen d=2 levels over K at 3: {}", d2.bianchi_levels.unwrap_or_default().join(", "));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
