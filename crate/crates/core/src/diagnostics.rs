//! Goodness-of-fit and autocorrelation tools used to validate samplers.

use std::f64::consts::PI;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
pub fn ks_statistic(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = draws.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (f - lo).abs().max((hi - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = (-PI * PI / (8.0 * lambda * lambda)).exp();
        let sum: f64 = (0..32).map(|j| y.powi((2 * j + 1) * (2 * j + 1))).sum();
        (1.0 - (2.0 * PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let sum: f64 = (1..64)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (j * j) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// One-sample KS test; returns the asymptotic p-value with the usual
/// small-sample correction `(√n + 0.12 + 0.11/√n) D`.
pub fn ks_test(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let d = ks_statistic(draws, cdf);
    let sn = (draws.len() as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Pearson chi-square goodness-of-fit p-value of observed counts against
/// category probabilities. Categories with zero probability must have zero
/// counts (otherwise the p-value is 0) and are excluded from the degrees of
/// freedom.
pub fn chi_square_test(counts: &[usize], probs: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    let mut stat = 0.0;
    let mut cats = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            if c > 0 {
                return 0.0;
            }
            continue;
        }
        let e = p * n as f64;
        stat += (c as f64 - e).powi(2) / e;
        cats += 1;
    }
    if cats < 2 {
        return 1.0;
    }
    let chi = ChiSquared::new((cats - 1) as f64).expect("positive dof");
    1.0 - chi.cdf(stat)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Effective sample size with Geyer's initial positive sequence truncation.
///
/// Returns `None` for a constant trace.
pub fn effective_sample_size(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    let m = mean(xs);
    let centered: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(c0 > 0.0) || c0 < 1e-300 {
        return None;
    }
    let autocorr = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
            / c0
    };
    // τ = −1 + 2 Σ_m Γ_m, Γ_m = ρ_{2m} + ρ_{2m+1}, summed while Γ_m > 0
    let mut tau = -1.0;
    let mut lag = 0;
    let mut prev_pair = f64::INFINITY;
    while lag + 1 < n {
        let rho0 = if lag == 0 { 1.0 } else { autocorr(lag) };
        let pair = rho0 + autocorr(lag + 1);
        if pair <= 0.0 {
            break;
        }
        // monotone sequence estimator
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        lag += 2;
    }
    let tau = tau.max(1.0 / n as f64);
    Some(n as f64 / tau)
}

/// Split-chain potential scale reduction factor over two or more chains.
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<f64> {
    if chains.len() < 2 {
        return None;
    }
    let len = chains.iter().map(Vec::len).min()? / 2;
    if len < 2 {
        return None;
    }
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..len], &c[len..2 * len]])
        .collect();
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let vars: Vec<f64> = halves.iter().map(|h| variance(h)).collect();
    let n = len as f64;
    let between = n * variance(&means);
    let within = mean(&vars);
    if !(within > 0.0) {
        return None;
    }
    let var_plus = (n - 1.0) / n * within + between / n;
    Some((var_plus / within).sqrt())
}

/// Geweke-style z-score comparing an iid sample mean against the mean of an
/// autocorrelated chain, whose standard error uses its effective sample size.
pub fn geweke_z(iid: &[f64], chain: &[f64]) -> f64 {
    let ess = effective_sample_size(chain).unwrap_or(chain.len() as f64);
    let se2 = variance(iid) / iid.len() as f64 + variance(chain) / ess;
    (mean(iid) - mean(chain)) / se2.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{standard_normal, RngStream};

    #[test]
    fn kolmogorov_branches_agree() {
        for &l in &[1.1, 1.15, 1.2, 1.25] {
            let y = (-PI * PI / (8.0 * l * l)).exp();
            let small: f64 = 1.0 - (2.0 * PI).sqrt() / l * (0..32).map(|j| y.powi((2 * j + 1) * (2 * j + 1))).sum::<f64>();
            let large: f64 = 2.0
                * (1..64)
                    .map(|j| if j % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * (j * j) as f64 * l * l).exp())
                    .sum::<f64>();
            assert!((small - large).abs() < 1e-10);
        }
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn ks_accepts_correct_and_rejects_wrong_cdf() {
        let mut rng = RngStream::new(1, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.open_unit()).collect();
        assert!(ks_test(&xs, |x| x.clamp(0.0, 1.0)) > 0.01);
        assert!(ks_test(&xs, |x| x.clamp(0.0, 1.0).powf(1.1)) < 1e-6);
    }

    #[test]
    fn chi_square_detects_mismatch() {
        assert!(chi_square_test(&[500, 500], &[0.5, 0.5]) > 0.99);
        assert!(chi_square_test(&[600, 400], &[0.5, 0.5]) < 1e-6);
        assert_eq!(chi_square_test(&[1, 10], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn ess_of_iid_and_ar1() {
        let mut rng = RngStream::new(2, 0);
        let iid: Vec<f64> = (0..10_000).map(|_| standard_normal(&mut rng)).collect();
        let ess = effective_sample_size(&iid).unwrap();
        assert!((8000.0..=12000.0).contains(&ess), "{ess}");

        let rho: f64 = 0.5;
        let n = 100_000;
        let mut x = 0.0;
        let ar: Vec<f64> = (0..n)
            .map(|_| {
                x = rho * x + (1.0 - rho * rho).sqrt() * standard_normal(&mut rng);
                x
            })
            .collect();
        let ess = effective_sample_size(&ar).unwrap();
        let target = n as f64 * (1.0 - rho) / (1.0 + rho);
        assert!((ess / target - 1.0).abs() < 0.1, "{ess} vs {target}");
        assert!(effective_sample_size(&[3.0; 50]).is_none());
    }

    #[test]
    fn rhat_near_one_for_matching_chains() {
        let mut rng = RngStream::new(3, 0);
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..2000).map(|_| standard_normal(&mut rng)).collect())
            .collect();
        let r = split_rhat(&chains).unwrap();
        assert!((r - 1.0).abs() < 0.01, "{r}");
        let shifted = vec![chains[0].clone(), chains[1].iter().map(|x| x + 3.0).collect()];
        assert!(split_rhat(&shifted).unwrap() > 1.5);
    }
}
