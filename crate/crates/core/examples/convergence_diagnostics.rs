//! Run independent chains from different seeds and report effective sample
//! sizes and split R-hat for the headline traces.

use typedflow::distributions::RngStream;
use typedflow::experiment::DATA_STREAM;
use typedflow::posterior::summarize_chains;
use typedflow::simulate::{generate_scenario, ScenarioName};
use typedflow::{run_mcmc, Hyperparams, McmcConfig};

fn main() -> typedflow::Result<()> {
    let (sim, _) = generate_scenario(ScenarioName::Mf6040, 300, &mut RngStream::new(9, DATA_STREAM))?;
    let hp = Hyperparams::default();
    let chains = (1..=3)
        .map(|seed| {
            let cfg = McmcConfig {
                iterations: 1500,
                burn_in: 500,
                seed,
                ..McmcConfig::default()
            };
            run_mcmc(&sim.points, &hp, &cfg)
        })
        .collect::<typedflow::Result<Vec<_>>>()?;

    println!("{:<22} {:>8} {:>8} {:>8} {:>6}", "trace", "mean", "sd", "ess", "rhat");
    for name in ["male_source_fraction", "p_fm", "p_none", "p_mf", "mu_link", "var_link", "gamma"] {
        let columns: Vec<Vec<f64>> = chains
            .iter()
            .map(|ps| ps.traces.get(name).expect("standard trace").to_vec())
            .collect();
        let s = summarize_chains(&columns)?;
        let rhat = s.rhat.map_or("-".to_string(), |r| format!("{r:.3}"));
        println!("{name:<22} {:>8.3} {:>8.3} {:>8.0} {rhat:>6}", s.mean, s.sd, s.ess);
    }
    Ok(())
}
