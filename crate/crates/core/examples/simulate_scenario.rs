//! Generate a synthetic dataset from one of the built-in scenarios and write
//! it as CSV with its truth sidecar.
//!
//! cargo run --example simulate_scenario -- [scenario] [n] [seed]

use typedflow::distributions::RngStream;
use typedflow::experiment::DATA_STREAM;
use typedflow::io::write_simulation;
use typedflow::sampler::type_counts;
use typedflow::simulate::{generate_scenario, ScenarioName};
use typedflow::TypeLabel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name: ScenarioName = args.next().as_deref().unwrap_or("mf6040").parse()?;
    let n: usize = args.next().map_or(400, |s| s.parse().expect("n must be an integer"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed must be an integer"));

    let (sim, sc) = generate_scenario(name, n, &mut RngStream::new(seed, DATA_STREAM))?;
    let counts = type_counts(&sim.labels);
    println!("scenario {name}: {n} points");
    for k in TypeLabel::ALL {
        println!(
            "  type {:>2}: {:>4} points (p = {:.2})",
            k.value(),
            counts[k.index()],
            sc.params.type_probs[k.index()]
        );
    }
    println!("  realized male-source fraction {:.3}", counts[2] as f64 / (counts[0] + counts[2]) as f64);

    let dir = std::env::temp_dir().join("typedflow-simulate");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join(format!("{}.csv", name.cli_name()));
    let truth = write_simulation(&csv, &sim, &sc, seed)?;
    println!("wrote {} and {}", csv.display(), truth.display());
    Ok(())
}
