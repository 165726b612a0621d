// Replaying the agents' statements with and without counterfactual composition.

use hardy_lab::epistemic::{run_trace, run_trace_with, AxiomSet, TraceOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let report = run_trace(AxiomSet::all())?;
    for v in &report.statements {
        println!("{:<9} {:?}", v.id, v.classification);
    }
    if let Some(c) = &report.contradiction {
        println!(
            "contradiction: composed {} vs actual {:.6}; rooted in {:?}",
            c.witness.composed, c.witness.actual, c.counterfactual_roots
        );
    }
    let careful = run_trace_with(AxiomSet::all(), &TraceOptions { counterfactual_composition: false, admitted: None })?;
    println!("with counterfactual composition forbidden: contradiction = {}", careful.has_contradiction());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
