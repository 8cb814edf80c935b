//! Run the file pipeline end to end: fit, write the posterior directory,
//! read it back and produce the source-age, band and surface summaries.

use typedflow::distributions::RngStream;
use typedflow::experiment::DATA_STREAM;
use typedflow::io::{load_dataset_csv, read_posterior_dir, write_posterior_outputs, write_simulation, RunConfig};
use typedflow::report::{hdi_text, write_posterior_summaries, SummarizeOptions};
use typedflow::run_mcmc;
use typedflow::simulate::{generate_scenario, ScenarioName};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join("typedflow-summaries");
    let data = root.join("data.csv");
    std::fs::create_dir_all(&root)?;

    let (sim, sc) = generate_scenario(ScenarioName::Mf6040, 400, &mut RngStream::new(3, DATA_STREAM))?;
    write_simulation(&data, &sim, &sc, 3)?;

    let cfg = RunConfig {
        iterations: 2000,
        burn_in: 1000,
        seed: 3,
        ..RunConfig::default()
    };
    let ds = load_dataset_csv(&data, &cfg.load_options())?;
    let ps = run_mcmc(&ds.points, &cfg.hyperparams(), &cfg.mcmc_config())?;
    let fit_dir = root.join("fit");
    let manifest = write_posterior_outputs(&ps, &ds, &cfg, &fit_dir)?;
    println!("fit: {} files in {}", manifest.files.len(), fit_dir.display());

    let run = read_posterior_dir(&fit_dir)?;
    let report = write_posterior_summaries(&run, &SummarizeOptions::default(), &root.join("summary"))?;
    for (label, prop, count) in &report.table {
        println!("type {label:>2}: {prop}  {count}");
    }
    for d in &report.directions {
        println!("type {:+} source age, 50% HDI {}", d.label.value(), hdi_text(d));
        let areas: Vec<String> = d.hpr_areas.iter().map(|a| format!("{a:.0}")).collect();
        println!("  50/80/90% region areas (years^2): {}", areas.join(" / "));
        for (((lo, hi), mass), used) in d.band_masses.iter().zip(&d.band_draws_used).take(4) {
            println!("  recipients [{lo:.0}, {hi:.0}): mass {mass:.3} over {used} draws");
        }
    }
    Ok(())
}
