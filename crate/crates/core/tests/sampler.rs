use typedflow::distributions::RngStream;
use typedflow::experiment::DATA_STREAM;
use typedflow::simulate::{generate_scenario, ScenarioName};
use typedflow::{run_mcmc, run_mcmc_fixed_types, DataPoint, Hyperparams, McmcConfig, TypeLabel};

fn config(seed: u64) -> McmcConfig {
    McmcConfig {
        iterations: 300,
        burn_in: 100,
        thin: 4,
        seed,
        ..McmcConfig::default()
    }
}

#[test]
fn chains_are_reproducible_per_seed() {
    let (sim, _) = generate_scenario(ScenarioName::Mf6040, 150, &mut RngStream::new(1, DATA_STREAM)).unwrap();
    let hp = Hyperparams::default();
    let a = run_mcmc(&sim.points, &hp, &config(8)).unwrap();
    let b = run_mcmc(&sim.points, &hp, &config(8)).unwrap();
    let c = run_mcmc(&sim.points, &hp, &config(9)).unwrap();
    assert_eq!(a.len(), 50);
    assert_eq!(a.traces, b.traces);
    assert_ne!(a.traces, c.traces);
}

#[test]
fn draws_are_valid_states() {
    let (sim, _) = generate_scenario(ScenarioName::SameAge, 150, &mut RngStream::new(2, DATA_STREAM)).unwrap();
    let ps = run_mcmc(&sim.points, &Hyperparams::default(), &config(3)).unwrap();
    for s in &ps.draws {
        s.validate().unwrap();
        assert!((s.type_probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(s.mark_params.mu_link > 0.0 && s.mark_params.mu_dir_mf > 0.0 && s.mark_params.mu_dir_fm < 0.0);
        assert!(s.gamma > 0.0);
    }
    for f in &ps.assignment_freq {
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn extreme_direction_scores_force_the_type() {
    let (mut sim, _) = generate_scenario(ScenarioName::Mf6040, 120, &mut RngStream::new(4, DATA_STREAM)).unwrap();
    for (i, d) in [(0, 1.0), (1, 0.0)] {
        let p = sim.points[i];
        sim.points[i] = DataPoint::new(p.location[0], p.location[1], p.linkage(), d);
    }
    let ps = run_mcmc(&sim.points, &Hyperparams::default(), &config(5)).unwrap();
    for s in &ps.draws {
        assert_ne!(s.labels[0], TypeLabel::FemaleToMale);
        assert_ne!(s.labels[1], TypeLabel::MaleToFemale);
    }
}

#[test]
fn fixed_types_stay_fixed() {
    let (sim, _) = generate_scenario(ScenarioName::Mf5050, 100, &mut RngStream::new(6, DATA_STREAM)).unwrap();
    let labels: Vec<TypeLabel> = sim
        .points
        .iter()
        .map(|p| if p.direction() > 0.5 { TypeLabel::MaleToFemale } else { TypeLabel::FemaleToMale })
        .collect();
    let ps = run_mcmc_fixed_types(&sim.points, &labels, &Hyperparams::default(), &config(7)).unwrap();
    let mf = labels.iter().filter(|&&c| c == TypeLabel::MaleToFemale).count() as f64 / labels.len() as f64;
    for s in &ps.draws {
        assert_eq!(s.labels, labels);
    }
    let mean = ps.male_source_fraction().iter().sum::<f64>() / ps.len() as f64;
    assert!((mean - mf).abs() < 0.1, "{mean} vs {mf}");
}
