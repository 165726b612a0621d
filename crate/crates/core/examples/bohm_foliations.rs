// Same Born statistics, different hidden histories: the two foliations disagree on
// where the (okbar, ok) runs come from.

use hardy_lab::bohm::{compare_foliations, evolve, Foliation, TransportCoupling};
use hardy_lab::qcore::Outcome;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for foliation in Foliation::both() {
        let set = evolve(foliation, TransportCoupling::monotone())?;
        println!("foliation {foliation}: {} paths, total weight {:.15}", set.paths.len(), set.total_weight());
        for path in &set.paths {
            println!("  {} → {}  {:.6}", path.initial, path.final_config, path.weight);
        }
        for (origin, p) in set.origin_of(Outcome::OK_BAR, Outcome::OK)? {
            println!("  (okbar,ok) comes from {origin} with probability {p}");
        }
    }
    for coupling in [TransportCoupling::monotone(), TransportCoupling::independent()] {
        let report = compare_foliations(coupling)?;
        println!(
            "{:?}: marginals identical = {}, outcomes with foliation-dependent origins = {}",
            coupling.kind,
            report.marginals_identical,
            report.outcomes.iter().filter(|o| o.differs).count()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
