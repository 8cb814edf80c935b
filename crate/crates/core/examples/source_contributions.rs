//! Share of infections in young women attributable to younger and older
//! men, computed from the generating flow surface and from a fitted one.

use typedflow::distributions::RngStream;
use typedflow::experiment::{DATA_STREAM, SOURCE_AGE_EDGES, YOUNG_WOMEN};
use typedflow::posterior::band_source_shares;
use typedflow::simulate::{generate_scenario, ScenarioName};
use typedflow::{run_mcmc, Hyperparams, McmcConfig, TypeLabel};

fn main() -> typedflow::Result<()> {
    for name in [ScenarioName::SameAge, ScenarioName::DiscordantAge] {
        let (sim, sc) = generate_scenario(name, 400, &mut RngStream::new(17, DATA_STREAM))?;
        let mf = TypeLabel::MaleToFemale.index();
        let truth = band_source_shares(&sc.params.mixtures[mf], YOUNG_WOMEN, &SOURCE_AGE_EDGES)?;

        let cfg = McmcConfig {
            iterations: 2000,
            burn_in: 1000,
            seed: 17,
            ..McmcConfig::default()
        };
        let ps = run_mcmc(&sim.points, &Hyperparams::default(), &cfg)?;
        let mut fitted = [0.0; 3];
        for s in &ps.draws {
            let shares = band_source_shares(&s.mixtures[mf], YOUNG_WOMEN, &SOURCE_AGE_EDGES)?;
            fitted.iter_mut().zip(&shares).for_each(|(f, x)| *f += x / ps.len() as f64);
        }
        let (wy, wo) = name.focal_weights();
        println!("{name} (nominal {wy:.1} younger / {wo:.1} older):");
        println!("  generating surface: younger {:.3}, older {:.3}, other {:.3}", truth[0], truth[1], truth[2]);
        println!("  posterior mean:     younger {:.3}, older {:.3}, other {:.3}", fitted[0], fitted[1], fitted[2]);
    }
    Ok(())
}
