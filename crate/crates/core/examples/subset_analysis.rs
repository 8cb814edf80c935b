//! Compare the full typed model with the subset analysis, which fixes the
//! type of confidently linked points from their scores and drops the rest.

use typedflow::distributions::RngStream;
use typedflow::experiment::DATA_STREAM;
use typedflow::io::{apply_fixed_type_classification, Dataset, SubsetRule};
use typedflow::posterior::type_proportion_summary;
use typedflow::simulate::{generate_scenario, ScenarioName};
use typedflow::{run_mcmc, run_mcmc_fixed_types, Hyperparams, McmcConfig};

fn main() -> typedflow::Result<()> {
    let (sim, _) = generate_scenario(ScenarioName::Mf5050, 400, &mut RngStream::new(5, DATA_STREAM))?;
    let hp = Hyperparams::default();
    let cfg = McmcConfig {
        iterations: 2000,
        burn_in: 1000,
        seed: 5,
        ..McmcConfig::default()
    };

    let full = run_mcmc(&sim.points, &hp, &cfg)?;
    let full_frac = type_proportion_summary(&full, sim.points.len())?.male_source_fraction;
    println!("full model, {} points: {}", sim.points.len(), full_frac.format_percent());

    let ds = Dataset::from_points(sim.points.clone());
    for (name, rule) in [
        ("threshold", SubsetRule::default()),
        ("strict", SubsetRule::Strict { linkage: 0.6 }),
    ] {
        let (sub, labels) = apply_fixed_type_classification(&ds, rule);
        let ps = run_mcmc_fixed_types(&sub.points, &labels, &hp, &cfg)?;
        let frac = type_proportion_summary(&ps, sub.len())?.male_source_fraction;
        println!("{name} subset, {} points: {}", sub.len(), frac.format_percent());
    }
    println!("truth: 50.0%");
    Ok(())
}
