// The Frey curves of x⁴ + dy² = zᵖ and x² + dy⁶ = zᵖ, their invariants,
// and the isogeny identity making them Q-curves.

use qcurves::ellcurve::{frey_etilde, qcurve_identity_check, Equation, FreyInput};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let e = FreyInput::new(Equation::Eq24p, 7, 3, 5).curve()?;
    let inv = e.invariants();
    println!("E(3,5), d=7: Δ = {}, j = {}", inv.disc, inv.j.map(|j| j.to_string()).unwrap_or_default());

    let input = FreyInput::new(Equation::Benchen, 7, 11, 1);
    let et = frey_etilde(&input)?;
    println!("Ẽ(11,1), d=7: Δ = {}", et.disc());

    for input in [FreyInput::new(Equation::Eq24p, 5, 2, 3), FreyInput::new(Equation::Benchen, 6, 1, 1)] {
        let r = qcurve_identity_check(&input)?;
        println!("{} d={} ({},{}): identity holds = {} ({})", r.equation.name(), r.d, r.a, r.b, r.holds, r.detail);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
