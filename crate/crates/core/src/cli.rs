//! Command-line surface: `simulate`, `fit`, `summarize`, `replicate`.
//!
//! [`run`] returns the process exit code: 0 on success, 1 on a runtime
//! error, 2 on a usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Parser, Subcommand};

use crate::distributions::RngStream;
use crate::error::Result;
use crate::experiment::{run_replicates, ReplicateConfig, DATA_STREAM};
use crate::io::{
    apply_fixed_type_classification, load_dataset_csv, read_posterior_dir, write_posterior_outputs, write_simulation,
    FitMode, RunConfig,
};
use crate::posterior::type_proportion_summary;
use crate::report::{hdi_text, write_posterior_summaries, write_replicate_outputs, SummarizeOptions};
use crate::sampler::{run_mcmc, run_mcmc_fixed_types};
use crate::simulate::{generate_scenario, ScenarioName};

fn scenario_parser() -> impl TypedValueParser<Value = ScenarioName> {
    PossibleValuesParser::new(ScenarioName::ALL.map(ScenarioName::cli_name))
        .map(|s| s.parse::<ScenarioName>().expect("restricted to known names"))
}

#[derive(Debug, Parser)]
#[command(name = "typedflow", version, about = "Typed point process model for transmission flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its truth sidecar.
    Simulate {
        #[arg(long, value_parser = scenario_parser())]
        scenario: ScenarioName,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Dataset CSV; the truth is written next to it as `<out>.truth.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the Gibbs sampler on a dataset.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// TOML run configuration; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<FitMode>,
        /// Subset mode only: `d < 0.33` is -1, `d > 0.67` is +1, others dropped.
        #[arg(long)]
        strict_subset: bool,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Posterior summaries of a fitted run.
    Summarize {
        /// Output directory of `fit`.
        #[arg(long)]
        posterior: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        hdi_mass: f64,
        /// Width in years of the recipient age bands.
        #[arg(long, default_value_t = 3.0)]
        bands: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate, fit and score replicate datasets of a scenario.
    Replicate {
        #[arg(long, value_parser = scenario_parser())]
        scenario: ScenarioName,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { scenario, n, seed, out } => {
            let (sim, sc) = generate_scenario(scenario, n, &mut RngStream::new(seed, DATA_STREAM))?;
            let truth = write_simulation(&out, &sim, &sc, seed)?;
            println!("wrote {} points to {} (truth: {})", n, out.display(), truth.display());
        }
        Command::Fit {
            data,
            config,
            mode,
            strict_subset,
            iters,
            burnin,
            thin,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            if let Some(m) = mode {
                cfg.mode = m;
            }
            cfg.subset_strict |= strict_subset;
            if let Some(v) = iters {
                cfg.iterations = v;
            }
            if let Some(v) = burnin {
                cfg.burn_in = v;
            }
            if let Some(v) = thin {
                cfg.thin = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            cfg.validate()?;
            let loaded = load_dataset_csv(&data, &cfg.load_options())?;
            let hp = cfg.hyperparams();
            let mc = cfg.mcmc_config();
            let (ds, ps) = match cfg.mode {
                FitMode::Full => {
                    let ps = run_mcmc(&loaded.points, &hp, &mc)?;
                    (loaded, ps)
                }
                FitMode::Subset => {
                    let (ds, labels) = apply_fixed_type_classification(&loaded, cfg.subset_rule());
                    let ps = run_mcmc_fixed_types(&ds.points, &labels, &hp, &mc)?;
                    (ds, ps)
                }
            };
            let manifest = write_posterior_outputs(&ps, &ds, &cfg, &out)?;
            let tp = type_proportion_summary(&ps, ds.len())?;
            println!(
                "{} points, {} kept draws; male-source fraction {}; outputs in {}",
                manifest.n_points,
                manifest.kept_samples,
                tp.male_source_fraction.format_percent(),
                out.display()
            );
        }
        Command::Summarize {
            posterior,
            hdi_mass,
            bands,
            out,
        } => {
            let run = read_posterior_dir(&posterior)?;
            let opts = SummarizeOptions {
                hdi_mass,
                band_width: bands,
            };
            let report = write_posterior_summaries(&run, &opts, &out)?;
            for (label, prop, count) in &report.table {
                println!("type {label:>2}: {prop}  {count}");
            }
            println!("male-source fraction: {}", report.male_source_fraction);
            for d in &report.directions {
                println!("{:.0}% HDI of source age, type {}: {}", hdi_mass * 100.0, d.label.value(), hdi_text(d));
            }
        }
        Command::Replicate {
            scenario,
            n,
            reps,
            seed,
            iters,
            burnin,
            out,
        } => {
            let mut cfg = ReplicateConfig::new(scenario, n, reps, seed);
            if let Some(v) = iters {
                cfg.mcmc.iterations = v;
            }
            if let Some(v) = burnin {
                cfg.mcmc.burn_in = v;
            }
            cfg.mcmc.validate()?;
            let results = run_replicates(&cfg)?;
            let s = write_replicate_outputs(&cfg, &results, &out)?;
            println!(
                "{}: {}/{} posterior means within 0.05 of {}; {}/{} intervals cover; median width {:.3}",
                scenario.cli_name(),
                s.within_005,
                s.reps,
                s.true_fraction,
                s.covered,
                s.reps,
                s.median_ci_width
            );
        }
    }
    Ok(())
}
