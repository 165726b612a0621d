// Density operators: dephasing the Hardy state in one local basis.

use hardy_lab::hardy::{hardy_state, COIN, SPIN};
use hardy_lab::qcore::{born_distribution_mixed, dephase, Basis, DensityOperator};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rho = DensityOperator::from_pure(&hardy_state());
    let spin_z = dephase(&rho, SPIN, Basis::Z)?;
    let both = dephase(&spin_z, COIN, Basis::Zbar)?;
    for (name, r) in [("pure", &rho), ("spin dephased", &spin_z), ("both dephased", &both)] {
        let table = born_distribution_mixed(r, &[Basis::Wbar, Basis::W])?;
        let probs: Vec<String> = table.probabilities().iter().map(|p| format!("{p:.4}")).collect();
        println!("{name:<14} (Wbar,W): {}", probs.join(" "));
    }
    println!("dephasing twice changes nothing: {:.1e}", dephase(&spin_z, SPIN, Basis::Z)?.max_abs_diff(&spin_z)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
