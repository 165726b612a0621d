// Born tables of the Hardy state in its four measurement contexts.

use hardy_lab::hardy::{context_table, hardy_state, MeasurementContext};
use hardy_lab::numfmt::display_probability;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let state = hardy_state();
    println!("amplitudes (h↓, h↑, t↓, t↑): {:?}", state.amplitudes().iter().map(|z| z.re).collect::<Vec<_>>());
    for ctx in MeasurementContext::all() {
        println!("{ctx}");
        for (labels, p) in context_table(ctx).entries() {
            println!("  {:<8} {:<6} {}", labels[0].symbol(), labels[1].symbol(), display_probability(p));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
