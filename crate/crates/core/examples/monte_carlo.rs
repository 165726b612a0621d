// Sampling single trajectories and comparing path frequencies with the exact weights.

use hardy_lab::bohm::{evolve, monte_carlo_check, Foliation, TransportCoupling};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let set = evolve(Foliation::F, TransportCoupling::monotone())?;
    let report = monte_carlo_check(&set, 100_000, 2024)?;
    for p in &report.paths {
        println!(
            "{} → {:<12} weight {:.6} frequency {:.6} ({:+.2}σ)",
            p.initial,
            p.events.iter().map(|t| t.to.name()).collect::<Vec<_>>().join(","),
            p.weight,
            p.frequency,
            (p.frequency - p.weight) / p.sigma
        );
    }
    println!("all within 4σ: {}", report.all_within_four_sigma());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
