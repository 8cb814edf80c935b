//! Per-point type assignment frequencies and their entropy. Points above
//! the flexible threshold are the ones whose direction the data leave open.

use typedflow::distributions::RngStream;
use typedflow::experiment::DATA_STREAM;
use typedflow::posterior::{classification_entropy, FLEXIBLE_ENTROPY};
use typedflow::simulate::{generate_scenario, ScenarioName};
use typedflow::{run_mcmc, Hyperparams, McmcConfig};

fn main() -> typedflow::Result<()> {
    let (sim, _) = generate_scenario(ScenarioName::Mf6040, 300, &mut RngStream::new(21, DATA_STREAM))?;
    let cfg = McmcConfig {
        iterations: 1500,
        burn_in: 500,
        seed: 21,
        ..McmcConfig::default()
    };
    let ps = run_mcmc(&sim.points, &Hyperparams::default(), &cfg)?;

    let summaries: Vec<_> = ps.assignment_freq.iter().map(classification_entropy).collect();
    let agree = summaries.iter().zip(&sim.labels).filter(|(s, &c)| s.modal == c).count();
    let flexible = summaries.iter().filter(|s| s.flexible).count();
    println!("modal type matches the hidden type for {agree}/{} points", sim.points.len());
    println!("{flexible} points have entropy above {FLEXIBLE_ENTROPY}");

    let mut order: Vec<usize> = (0..summaries.len()).collect();
    order.sort_by(|&a, &b| summaries[b].entropy.total_cmp(&summaries[a].entropy));
    println!("most uncertain points (freq of -1 / 0 / +1, hidden type):");
    for &i in order.iter().take(5) {
        let f = ps.assignment_freq[i];
        let p = &sim.points[i];
        println!(
            "  l={:.2} d={:.2}  {:.2} / {:.2} / {:.2}  entropy {:.3}  hidden {:+}",
            p.linkage(),
            p.direction(),
            f[0],
            f[1],
            f[2],
            summaries[i].entropy,
            sim.labels[i].value()
        );
    }
    Ok(())
}
