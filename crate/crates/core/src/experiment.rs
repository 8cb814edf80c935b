//! Recovery experiments: simulate a scenario, fit it, score the estimate.
//!
//! Replicate `r` of a run with seed `s` uses `mix_seed(s, r)` as its own
//! seed. Its data come from stream 2 of that seed and its chain from streams
//! 0 and 1, so replicates are independent and can run in any order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{mix_seed, RngStream};
use crate::error::Result;
use crate::model::{Hyperparams, TypeLabel};
use crate::posterior::{band_source_shares, CredibleInterval};
use crate::sampler::{run_mcmc, McmcConfig};
use crate::simulate::{generate_scenario, ScenarioName};

/// RNG stream of the simulated data; the chain uses streams 0 and 1.
pub const DATA_STREAM: u64 = 2;

/// Female recipient ages whose male sources are apportioned.
pub const YOUNG_WOMEN: (f64, f64) = (15.0, 25.0);
/// Male age groups: younger below 30, older in `[30, 40)`, other men above.
pub const SOURCE_AGE_EDGES: [f64; 4] = [f64::NEG_INFINITY, 30.0, 40.0, f64::INFINITY];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateConfig {
    pub scenario: ScenarioName,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
    pub hyperparams: Hyperparams,
}

impl ReplicateConfig {
    pub fn new(scenario: ScenarioName, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            scenario,
            n,
            reps,
            seed,
            mcmc: McmcConfig::default(),
            hyperparams: Hyperparams::default(),
        }
    }

    pub fn replicate_seed(&self, rep: usize) -> u64 {
        mix_seed(self.seed, rep as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    /// Scenario value of `p₊₁ / (p₊₁ + p₋₁)`.
    pub true_fraction: f64,
    /// Realized fraction among the simulated event points.
    pub sample_fraction: f64,
    /// Posterior mean and 95% interval of the male-source fraction.
    pub fraction: CredibleInterval,
    /// Posterior mean share of infections in women aged 15–24 from younger
    /// and older men, and the scenario's nominal shares.
    pub younger: f64,
    pub older: f64,
    pub true_younger: f64,
    pub true_older: f64,
}

impl ReplicateResult {
    pub fn fraction_error(&self) -> f64 {
        self.fraction.mean - self.true_fraction
    }

    pub fn ordering_correct(&self) -> bool {
        (self.younger > self.older) == (self.true_younger > self.true_older)
    }
}

pub fn run_replicate(cfg: &ReplicateConfig, rep: usize) -> Result<ReplicateResult> {
    let seed = cfg.replicate_seed(rep);
    let mut data_rng = RngStream::new(seed, DATA_STREAM);
    let (sim, scenario) = generate_scenario(cfg.scenario, cfg.n, &mut data_rng)?;
    let mcmc = McmcConfig {
        seed,
        ..cfg.mcmc.clone()
    };
    let ps = run_mcmc(&sim.points, &cfg.hyperparams, &mcmc)?;

    let count = |k| sim.labels.iter().filter(|&&c| c == k).count() as f64;
    let (mf, fm) = (count(TypeLabel::MaleToFemale), count(TypeLabel::FemaleToMale));
    let mut contrib = [0.0; 2];
    for s in &ps.draws {
        let c = band_source_shares(s.mixture(TypeLabel::MaleToFemale), YOUNG_WOMEN, &SOURCE_AGE_EDGES)?;
        contrib[0] += c[0];
        contrib[1] += c[1];
    }
    let kept = ps.len() as f64;
    let (true_younger, true_older) = scenario.name.focal_weights();
    Ok(ReplicateResult {
        rep,
        seed,
        n: cfg.n,
        true_fraction: scenario.name.male_source_fraction(),
        sample_fraction: if mf + fm > 0.0 { mf / (mf + fm) } else { f64::NAN },
        fraction: CredibleInterval::from_draws(&ps.male_source_fraction())?,
        younger: contrib[0] / kept,
        older: contrib[1] / kept,
        true_younger,
        true_older,
    })
}

/// Runs all replicates on the rayon pool; results are in replicate order.
pub fn run_replicates(cfg: &ReplicateConfig) -> Result<Vec<ReplicateResult>> {
    (0..cfg.reps).into_par_iter().map(|r| run_replicate(cfg, r)).collect()
}

/// Aggregate scores of a replicate set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub scenario: ScenarioName,
    pub n: usize,
    pub reps: usize,
    pub true_fraction: f64,
    pub median_fraction: f64,
    /// Replicates whose posterior mean is within 0.05 of the truth.
    pub within_005: usize,
    /// Replicates whose 95% interval covers the truth.
    pub covered: usize,
    pub median_ci_width: f64,
    /// Replicates whose larger focal contribution is the true larger one.
    pub ordering_correct: usize,
    /// Replicates with both focal contributions within 0.1 of the truth.
    pub contributions_within_01: usize,
}

pub fn summarize_replicates(cfg: &ReplicateConfig, results: &[ReplicateResult]) -> ExperimentSummary {
    let median = |mut xs: Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        crate::posterior::quantile_sorted(&xs, 0.5)
    };
    ExperimentSummary {
        scenario: cfg.scenario,
        n: cfg.n,
        reps: results.len(),
        true_fraction: cfg.scenario.male_source_fraction(),
        median_fraction: median(results.iter().map(|r| r.fraction.mean).collect()),
        within_005: results.iter().filter(|r| r.fraction_error().abs() <= 0.05).count(),
        covered: results.iter().filter(|r| r.fraction.contains(r.true_fraction)).count(),
        median_ci_width: median(results.iter().map(|r| r.fraction.width()).collect()),
        ordering_correct: results.iter().filter(|r| r.ordering_correct()).count(),
        contributions_within_01: results
            .iter()
            .filter(|r| (r.younger - r.true_younger).abs() <= 0.1 && (r.older - r.true_older).abs() <= 0.1)
            .count(),
    }
}

pub const REPLICATE_COLUMNS: [&str; 12] = [
    "rep",
    "seed",
    "n",
    "true_fraction",
    "sample_fraction",
    "posterior_mean",
    "ci_lower",
    "ci_upper",
    "younger",
    "older",
    "true_younger",
    "true_older",
];

pub fn replicates_csv_bytes(results: &[ReplicateResult]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPLICATE_COLUMNS).expect("writing to memory");
    for r in results {
        w.write_record([
            r.rep.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.true_fraction.to_string(),
            r.sample_fraction.to_string(),
            r.fraction.mean.to_string(),
            r.fraction.lower.to_string(),
            r.fraction.upper.to_string(),
            r.younger.to_string(),
            r.older.to_string(),
            r.true_younger.to_string(),
            r.true_older.to_string(),
        ])
        .expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replicate_seeds_are_distinct_and_stable() {
        let c = ReplicateConfig::new(ScenarioName::Mf6040, 50, 4, 3);
        let seeds: Vec<u64> = (0..4).map(|r| c.replicate_seed(r)).collect();
        let mut uniq = seeds.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 4);
        assert_eq!(seeds[2], ReplicateConfig::new(ScenarioName::Mf5050, 10, 1, 3).replicate_seed(2));
    }

    #[test]
    fn short_replicate_runs() {
        let mut c = ReplicateConfig::new(ScenarioName::SameAge, 60, 2, 11);
        c.mcmc.iterations = 60;
        c.mcmc.burn_in = 20;
        c.hyperparams.truncation = 5;
        let a = run_replicates(&c).unwrap();
        let b = run_replicates(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|r| (0.0..=1.0).contains(&r.fraction.mean)));
        let s = summarize_replicates(&c, &a);
        assert_eq!(s.reps, 2);
        let text = String::from_utf8(replicates_csv_bytes(&a)).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
