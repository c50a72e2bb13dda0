// The documents behind the command-line tool, built from the library.

use qcurves::ellcurve::Equation;
use qcurves::report::{cmd_analyze, cmd_verify_tables, AnalysisConfig, Format, Render};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let doc = cmd_analyze(&AnalysisConfig::new(Equation::Benchen, 6))?;
    print!("{}", doc.render(Format::Table));
    let tables = cmd_verify_tables(&[]);
    let json = tables.render(Format::Json);
    println!("verify-tables JSON is {} bytes, passed = {}", json.len(), tables.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
