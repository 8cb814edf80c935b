//! Fit the full typed model to a simulated dataset and print the posterior
//! type proportions next to the truth.

use typedflow::distributions::RngStream;
use typedflow::experiment::DATA_STREAM;
use typedflow::posterior::type_proportion_summary;
use typedflow::simulate::{generate_scenario, ScenarioName};
use typedflow::{run_mcmc, Hyperparams, McmcConfig};

fn main() -> typedflow::Result<()> {
    let (sim, sc) = generate_scenario(ScenarioName::Mf6040, 400, &mut RngStream::new(11, DATA_STREAM))?;
    let cfg = McmcConfig {
        iterations: 2000,
        burn_in: 1000,
        seed: 11,
        ..McmcConfig::default()
    };
    let ps = run_mcmc(&sim.points, &Hyperparams::default(), &cfg)?;
    let tp = type_proportion_summary(&ps, sim.points.len())?;

    println!("{} kept draws", ps.len());
    println!("type  truth  posterior proportion     count");
    for row in &tp.rows {
        println!(
            "{:>4}  {:.2}   {:<24} {}",
            row.label.value(),
            sc.params.type_probs[row.label.index()],
            row.proportion.format_percent(),
            row.count.format_count()
        );
    }
    println!(
        "male-source fraction: truth {:.2}, posterior {}",
        ScenarioName::Mf6040.male_source_fraction(),
        tp.male_source_fraction.format_percent()
    );
    Ok(())
}
