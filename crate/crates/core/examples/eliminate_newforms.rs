// Mazur's trick on the level 2·7² newforms shipped in fixtures/.

use qcurves::eliminate::{eliminate_space, load_newforms, trace_fingerprint, Context};
use qcurves::ellcurve::Equation;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/d7_level98.json");
    let forms = load_newforms(&std::fs::read_to_string(path)?)?;
    let ctx = Context::new(Equation::Eq24p, 7)?;
    let space = eliminate_space(&forms, &ctx, &[3, 5])?;
    for f in &space.forms {
        println!("{}: Mazur survivors {}", f.form_label, f.mazur_survivors);
        for c in &f.per_q {
            println!("  C({},g) = {}", c.q, c.value());
        }
    }
    println!("a_5 values of the d=2 Frey family: {:?}", trace_fingerprint(Equation::Benchen, 2, 5)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
