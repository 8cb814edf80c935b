//! Simulate-and-refit replicates of a scenario and score recovery of the
//! male-source fraction and of the younger/older source shares.
//!
//! cargo run --release --example recovery_experiment -- [scenario] [n] [reps]

use typedflow::experiment::{run_replicates, summarize_replicates, ReplicateConfig};
use typedflow::simulate::ScenarioName;

fn main() -> typedflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let name: ScenarioName = args.next().as_deref().unwrap_or("same-age").parse()?;
    let n: usize = args.next().map_or(400, |s| s.parse().expect("n must be an integer"));
    let reps: usize = args.next().map_or(4, |s| s.parse().expect("reps must be an integer"));

    let cfg = ReplicateConfig::new(name, n, reps, 2024);
    let results = run_replicates(&cfg)?;
    println!("rep  fraction (95% CI)        younger  older");
    for r in &results {
        println!(
            "{:>3}  {:.3} ({:.3}, {:.3})    {:.3}    {:.3}",
            r.rep, r.fraction.mean, r.fraction.lower, r.fraction.upper, r.younger, r.older
        );
    }
    let s = summarize_replicates(&cfg, &results);
    println!(
        "truth {:.2}: {}/{} within 0.05, {}/{} covered, ordering correct in {}/{}",
        s.true_fraction, s.within_005, s.reps, s.covered, s.reps, s.ordering_correct, s.reps
    );
    Ok(())
}
