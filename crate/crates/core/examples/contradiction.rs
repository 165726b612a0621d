// Chaining three context-local certainties predicts an outcome that occurs 1 time in 12.

use hardy_lab::hardy::{chain_prediction, check_inference, hardy_chain, InferenceRule};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for rule in hardy_chain().iter().chain([InferenceRule::i()].iter()) {
        println!("{rule}: holds = {}", check_inference(rule)?);
    }
    let cert = chain_prediction(&hardy_chain())?;
    println!(
        "composed prediction P({},{}) = {}, Born value in {} = {:.6}, certificate valid: {}",
        cert.outcome.0.symbol(),
        cert.outcome.1.symbol(),
        cert.composed_prediction,
        cert.context,
        cert.actual,
        cert.is_valid()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
