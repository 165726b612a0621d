// Erasing a friend's record restores interference; keeping it does not.

use hardy_lab::hardy::{hardy_state, MeasurementContext};
use hardy_lab::memory::{definite_outcome_flag, record_and_erase, record_and_keep, Friend};
use hardy_lab::qcore::{Basis, Outcome};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let state = hardy_state();
    let ctx = MeasurementContext::WBAR_W.bases();
    let pair = [Outcome::FAIL_BAR, Outcome::FAIL];

    let erased = record_and_erase(&state, Friend::F, Basis::Z)?;
    for (registers, weight) in erased.register_branches() {
        println!("branch weight {weight:.4}: {}", registers.iter().map(|r| r.content.to_string()).collect::<Vec<_>>().join(" "));
    }
    println!("flag: {:?}", definite_outcome_flag(&erased)?);
    println!("erased:      P(failbar,fail) = {:.6}", erased.final_state()?.table(&ctx)?.prob(&pair)?);

    for kept in [vec![Friend::F], vec![Friend::Fbar], vec![Friend::F, Friend::Fbar]] {
        let run = record_and_keep(&state, &kept)?;
        println!("kept {kept:?}: P(failbar,fail) = {:.6}", run.final_state()?.table(&ctx)?.prob(&pair)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
