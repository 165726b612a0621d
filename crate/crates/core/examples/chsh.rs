// Singlet versus local hidden variables, and what kept records do to the singlet.

use hardy_lab::bell::{
    chsh, erased_vs_kept_chsh, lhv_correlation, quantum_correlation, scan_chsh, AngleQuad, LHVModel, GRID_RESOLUTION,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let quad = AngleQuad::tsirelson();
    let model = LHVModel::default();
    println!("quad {quad}");
    println!("S quantum = {:.9}", chsh(quantum_correlation, &quad));
    println!("S local   = {:.9}", chsh(|a, b| lhv_correlation(&model, a, b), &quad));
    let scan = scan_chsh(|a, b| lhv_correlation(&model, a, b), GRID_RESOLUTION);
    println!("local model maximum {:.9} at {}", scan.max, scan.argmax);
    let r = erased_vs_kept_chsh()?;
    println!("records erased: S = {:.9}; records kept: S max = {:.9}", r.erased_s, r.kept_s_max);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
