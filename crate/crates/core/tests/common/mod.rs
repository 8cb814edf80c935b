//! Brute-force oracles shared by the conditional, joint-distribution and
//! acceptance tests. Densities here are written out from scratch and
//! integrated numerically; nothing reuses the sampler's conjugate algebra.
#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;
use typedflow::distributions::{gamma, inverse_gamma, RngStream};
use typedflow::model::point_mark_log_density;
use typedflow::sampler::{
    sample_gamma_scale, update_component_indicators, update_component_params, update_dp_precision,
    update_mark_params, update_stick_breaking_weights, update_type_indicators, update_type_probs,
};
use typedflow::diagnostics::{chi_square_test, ks_test};
use typedflow::*;

pub const DRAWS: usize = 5000;
pub const P_MIN: f64 = 0.01;

/// Normalized CDF of an unnormalized log density on `[lo, hi]`, by the
/// trapezoid rule on `n` intervals with linear interpolation between nodes.
pub struct GridCdf {
    xs: Vec<f64>,
    cum: Vec<f64>,
}

impl GridCdf {
    pub fn from_log_density(lo: f64, hi: f64, n: usize, logpdf: impl Fn(f64) -> f64) -> Self {
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let lp: Vec<f64> = xs.iter().map(|&x| logpdf(x)).collect();
        let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pdf: Vec<f64> = lp.iter().map(|v| (v - max).exp()).collect();
        Self::from_pdf(xs, pdf)
    }

    pub fn from_pdf(xs: Vec<f64>, pdf: Vec<f64>) -> Self {
        let mut cum = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cum[i] = cum[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let total = cum[cum.len() - 1];
        cum.iter_mut().for_each(|c| *c /= total);
        Self { xs, cum }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[self.xs.len() - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.cum[i] + t * (self.cum[i + 1] - self.cum[i])
    }
}

fn ln_normal(x: f64, m: f64, v: f64) -> f64 {
    -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v)
}

fn ln_bvn(s: Vec2, m: Vec2, c: &SymMat2) -> f64 {
    let det = c.xx * c.yy - c.xy * c.xy;
    let (dx, dy) = (s[0] - m[0], s[1] - m[1]);
    let q = (c.yy * dx * dx - 2.0 * c.xy * dx * dy + c.xx * dy * dy) / det;
    -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - 0.5 * q
}

/// Standard inverse-Wishart log density up to a constant, mean `S/(ν − 3)`.
fn ln_inv_wishart(c: &SymMat2, nu: f64, s: &SymMat2) -> f64 {
    let det = c.xx * c.yy - c.xy * c.xy;
    if !(det > 0.0 && c.xx > 0.0) {
        return f64::NEG_INFINITY;
    }
    // tr(S C⁻¹)
    let tr = (s.xx * c.yy - 2.0 * s.xy * c.xy + s.yy * c.xx) / det;
    -0.5 * (nu + 3.0) * det.ln() - 0.5 * tr
}

/// One named check with its p-value.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub p: f64,
}

impl Check {
    fn new(name: &str, p: f64) -> Self {
        Self { name: name.into(), p }
    }
}

/// Small instance: five points with H = 2.
pub struct Instance {
    pub hp: Hyperparams,
    pub data: Vec<DataPoint>,
    pub state: ModelState,
}

pub fn instance() -> Instance {
    let hp = Hyperparams {
        truncation: 2,
        ..Hyperparams::default()
    };
    let data = vec![
        DataPoint::new(24.0, 21.0, 0.88, 0.81),
        DataPoint::new(27.5, 19.0, 0.62, 0.35),
        DataPoint::new(31.0, 26.0, 0.93, 0.22),
        DataPoint::new(36.0, 33.0, 0.41, 0.55),
        DataPoint::new(29.0, 24.0, 0.77, 1.0),
    ];
    let mix = |a: Vec2, b: Vec2, w: f64, alpha: f64| {
        TypedMixture::from_weights(
            &[w, 1.0 - w],
            vec![
                BvnComponent::new(a, SymMat2::new(16.0, 4.0, 9.0)),
                BvnComponent::new(b, SymMat2::new(25.0, -5.0, 20.0)),
            ],
            alpha,
        )
        .unwrap()
    };
    let state = ModelState {
        gamma: 5.0,
        type_probs: [0.3, 0.25, 0.45],
        mixtures: [
            mix([26.0, 28.0], [38.0, 40.0], 0.7, 0.8),
            mix([33.0, 30.0], [25.0, 35.0], 0.4, 1.3),
            mix([26.0, 21.0], [34.0, 22.0], 0.65, 0.5),
        ],
        mark_params: MarkParams {
            mu_link: 1.2,
            mu_dir_mf: 0.9,
            mu_dir_fm: -0.7,
            var_link: 1.4,
            var_dir: 0.8,
            fixed_means: false,
        },
        labels: vec![
            TypeLabel::MaleToFemale,
            TypeLabel::FemaleToMale,
            TypeLabel::MaleToFemale,
            TypeLabel::NoEvent,
            TypeLabel::MaleToFemale,
        ],
        components: vec![0, 1, 0, 1, 1],
    };
    state.validate().unwrap();
    Instance { hp, data, state }
}

fn ks(name: &str, draws: &[f64], g: &GridCdf) -> Check {
    Check::new(name, ks_test(draws, |x| g.cdf(x)))
}

pub fn check_gamma(inst: &Instance) -> Vec<Check> {
    let n = inst.data.len();
    let hp = &inst.hp;
    let mut rng = RngStream::new(101, 0);
    let draws: Vec<f64> = (0..DRAWS).map(|_| sample_gamma_scale(n, hp, &mut rng)).collect();
    // Gamma prior times the Poisson count likelihood with unit-mass intensity.
    let g = GridCdf::from_log_density(1e-9, 40.0, 40_000, |x| {
        (hp.a0 - 1.0) * x.ln() - hp.b0 * x + n as f64 * x.ln() - x
    });
    vec![ks("gamma", &draws, &g)]
}

pub fn check_type_probs(inst: &Instance) -> Vec<Check> {
    let mut rng = RngStream::new(102, 0);
    let draws: Vec<[f64; 3]> = (0..DRAWS)
        .map(|_| update_type_probs(&inst.state.labels, &inst.hp, &mut rng))
        .collect();
    let mut n = [0.0; 3];
    for c in &inst.state.labels {
        n[c.index()] += 1.0;
    }
    let expo: Vec<f64> = (0..3).map(|k| inst.hp.q[k] - 1.0 + n[k]).collect();
    let mut out = Vec::new();
    for k in 0..3 {
        // Marginal of p_k: integrate the simplex density over the second coordinate.
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let xs: Vec<f64> = (0..=2000).map(|i| i as f64 / 2000.0).collect();
        let pdf: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let rest = 1.0 - x;
                if rest <= 0.0 {
                    return 0.0;
                }
                let m = 400;
                let mut s = 0.0;
                for j in 0..m {
                    let u = rest * (j as f64 + 0.5) / m as f64;
                    let v = rest - u;
                    s += (expo[k] * x.ln() + expo[a] * u.ln() + expo[b] * v.ln()).exp();
                }
                s * rest / m as f64
            })
            .collect();
        let g = GridCdf::from_pdf(xs, pdf);
        let d: Vec<f64> = draws.iter().map(|p| p[k]).collect();
        out.push(ks(&format!("type_probs[{k}]"), &d, &g));
    }
    out
}

/// Mark log-likelihood of the event-typed points under `mp`, straight from
/// the model's mark density.
fn mark_loglik(inst: &Instance, mp: &MarkParams) -> f64 {
    inst.data
        .iter()
        .zip(&inst.state.labels)
        .map(|(p, &c)| point_mark_log_density(p, c, mp).unwrap())
        .sum()
}

pub fn check_mark_params(inst: &Instance) -> Vec<Check> {
    let mp0 = inst.state.mark_params;
    let mut rng = RngStream::new(103, 0);
    let free: Vec<MarkParams> = (0..DRAWS)
        .map(|_| update_mark_params(&inst.data, &inst.state.labels, &mp0, &inst.hp, &mut rng).unwrap())
        .collect();
    let fixed_mp = MarkParams {
        fixed_means: true,
        ..mp0
    };
    let fixed: Vec<MarkParams> = (0..DRAWS)
        .map(|_| update_mark_params(&inst.data, &inst.state.labels, &fixed_mp, &inst.hp, &mut rng).unwrap())
        .collect();

    let mut out = Vec::new();
    // Flat priors on the half-lines.
    let g = GridCdf::from_log_density(0.0, 12.0, 24_000, |m| mark_loglik(inst, &MarkParams { mu_link: m, ..mp0 }));
    out.push(ks("mu_link", &free.iter().map(|m| m.mu_link).collect::<Vec<_>>(), &g));
    let g = GridCdf::from_log_density(0.0, 12.0, 24_000, |m| mark_loglik(inst, &MarkParams { mu_dir_mf: m, ..mp0 }));
    out.push(ks("mu_dir_mf", &free.iter().map(|m| m.mu_dir_mf).collect::<Vec<_>>(), &g));
    let g = GridCdf::from_log_density(-12.0, 0.0, 24_000, |m| mark_loglik(inst, &MarkParams { mu_dir_fm: m, ..mp0 }));
    out.push(ks("mu_dir_fm", &free.iter().map(|m| m.mu_dir_fm).collect::<Vec<_>>(), &g));

    // inv-Gamma(ν0/2, ν0σ0²/2) priors on the variances.
    let hp = &inst.hp;
    let ln_prior = |v: f64| -(0.5 * hp.nu0 + 1.0) * v.ln() - 0.5 * hp.nu0 * hp.sigma0_sq / v;
    let g = GridCdf::from_log_density(1e-4, 200.0, 200_000, |v| {
        ln_prior(v) + mark_loglik(inst, &MarkParams { var_link: v, ..fixed_mp })
    });
    out.push(ks("var_link", &fixed.iter().map(|m| m.var_link).collect::<Vec<_>>(), &g));
    let g = GridCdf::from_log_density(1e-4, 200.0, 200_000, |v| {
        ln_prior(v) + mark_loglik(inst, &MarkParams { var_dir: v, ..fixed_mp })
    });
    out.push(ks("var_dir", &fixed.iter().map(|m| m.var_dir).collect::<Vec<_>>(), &g));
    out
}

fn joint_type_component_probs(inst: &Instance, i: usize) -> Vec<f64> {
    let p = &inst.data[i];
    let s = &inst.state;
    let mut w = Vec::new();
    for k in TypeLabel::ALL {
        let mix = s.mixture(k);
        let mark = point_mark_log_density(p, k, &s.mark_params).unwrap();
        for h in 0..mix.truncation() {
            let c = &mix.components[h];
            w.push(s.type_prob(k) * mix.weights[h] * (ln_bvn(p.location, c.mean, &c.cov) + mark).exp());
        }
    }
    let t: f64 = w.iter().sum();
    w.iter().map(|v| v / t).collect()
}

pub fn check_type_indicators(inst: &Instance) -> Vec<Check> {
    let h = inst.hp.truncation;
    let mut counts = vec![vec![0usize; 3 * h]; inst.data.len()];
    let mut rng = RngStream::new(104, 0);
    for _ in 0..DRAWS {
        let (labels, comps) = update_type_indicators(&inst.data, &inst.state, &mut rng).unwrap();
        for i in 0..inst.data.len() {
            counts[i][labels[i].index() * h + comps[i]] += 1;
        }
    }
    let mut out = Vec::new();
    for i in 0..inst.data.len() {
        let mut probs = joint_type_component_probs(inst, i);
        let p = &inst.data[i];
        if p.extreme_direction {
            // Event draws are forced onto the direction the score names.
            let (from, to) = if p.direction() >= 1.0 {
                (TypeLabel::FemaleToMale, TypeLabel::MaleToFemale)
            } else {
                (TypeLabel::MaleToFemale, TypeLabel::FemaleToMale)
            };
            // The component is drawn from the forced type's mixture, so the
            // moved mass is redistributed by that mixture's component odds.
            let moved: f64 = (0..h).map(|j| probs[from.index() * h + j]).sum();
            let s = &inst.state;
            let mix = s.mixture(to);
            let lw: Vec<f64> = (0..h)
                .map(|j| mix.weights[j] * ln_bvn(p.location, mix.components[j].mean, &mix.components[j].cov).exp())
                .collect();
            let lt: f64 = lw.iter().sum();
            for j in 0..h {
                probs[from.index() * h + j] = 0.0;
                probs[to.index() * h + j] += moved * lw[j] / lt;
            }
        }
        let (c, pr): (Vec<usize>, Vec<f64>) = counts[i]
            .iter()
            .zip(&probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&c, &p)| (c, p))
            .unzip();
        assert!(counts[i].iter().zip(&probs).all(|(&c, &p)| p > 0.0 || c == 0));
        out.push(Check::new(&format!("type_and_component[{i}]"), chi_square_test(&c, &pr)));
    }
    out
}

pub fn check_sticks(inst: &Instance) -> Vec<Check> {
    let mix = &inst.state.mixtures[2];
    let counts = [2usize, 1];
    let mut rng = RngStream::new(105, 0);
    let draws: Vec<f64> = (0..DRAWS)
        .map(|_| update_stick_breaking_weights(mix, &counts, &mut rng).sticks[0])
        .collect();
    // Beta(1, α) prior times ∏ w_{z_i} with w = (v, 1 − v).
    let a = mix.alpha;
    let g = GridCdf::from_log_density(1e-9, 1.0 - 1e-9, 100_000, |v| {
        (a - 1.0) * (1.0 - v).ln() + counts[0] as f64 * v.ln() + counts[1] as f64 * (1.0 - v).ln()
    });
    vec![ks("stick[0]", &draws, &g)]
}

/// The auxiliary-variable update leaves `p(α | k, n)` invariant; the chain
/// is thinned so successive kept draws are close to independent.
pub fn check_dp_precision(inst: &Instance) -> Vec<Check> {
    let hp = &inst.hp;
    let (k, n) = (2usize, 3usize);
    let mut rng = RngStream::new(106, 0);
    let mut alpha = 1.0;
    for _ in 0..200 {
        alpha = update_dp_precision(alpha, k, n, hp, &mut rng);
    }
    let thin = 10;
    let mut draws = Vec::with_capacity(DRAWS);
    for i in 0..DRAWS * thin {
        alpha = update_dp_precision(alpha, k, n, hp, &mut rng);
        if i % thin == 0 {
            draws.push(alpha);
        }
    }
    let g = GridCdf::from_log_density(1e-9, 30.0, 60_000, |a| {
        (hp.alpha_shape - 1.0) * a.ln() - hp.alpha_rate * a + k as f64 * a.ln() + ln_gamma(a) - ln_gamma(a + n as f64)
    });
    vec![ks("dp_precision", &draws, &g)]
}

pub fn check_component_indicators(inst: &Instance) -> Vec<Check> {
    let mix = &inst.state.mixtures[1];
    let points: Vec<Vec2> = inst.data.iter().map(|p| p.location).collect();
    let mut counts = vec![vec![0usize; 2]; points.len()];
    let mut rng = RngStream::new(107, 0);
    for _ in 0..DRAWS {
        for (i, z) in update_component_indicators(&points, mix, &mut rng).unwrap().into_iter().enumerate() {
            counts[i][z] += 1;
        }
    }
    points
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let w: Vec<f64> = (0..2)
                .map(|h| mix.weights[h] * ln_bvn(s, mix.components[h].mean, &mix.components[h].cov).exp())
                .collect();
            let t: f64 = w.iter().sum();
            let probs: Vec<f64> = w.iter().map(|v| v / t).collect();
            Check::new(&format!("component[{i}]"), chi_square_test(&counts[i], &probs))
        })
        .collect()
}

pub fn check_component_mean(inst: &Instance) -> Vec<Check> {
    let points: Vec<Vec2> = inst.data[..3].iter().map(|p| p.location).collect();
    let comp = BvnComponent::new([30.0, 25.0], SymMat2::new(16.0, 6.0, 12.0));
    let hp = Hyperparams {
        theta0: [28.0, 30.0],
        sigma0: SymMat2::new(9.0, 2.0, 16.0),
        ..inst.hp.clone()
    };
    let mut rng = RngStream::new(108, 0);
    let draws: Vec<Vec2> = (0..DRAWS)
        .map(|_| update_component_params(&points, &comp, &hp, &mut rng).unwrap().mean)
        .collect();
    // Prior times likelihood on a 2-D grid, marginalized onto each axis.
    let (lo, hi, n) = (0.0, 60.0, 600);
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let mut lp = vec![0.0; (n + 1) * (n + 1)];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            let t = [x, y];
            lp[i * (n + 1) + j] = ln_bvn(t, hp.theta0, &hp.sigma0)
                + points.iter().map(|&s| ln_bvn(s, t, &comp.cov)).sum::<f64>();
        }
    }
    let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut mx = vec![0.0; n + 1];
    let mut my = vec![0.0; n + 1];
    for i in 0..=n {
        for j in 0..=n {
            let v = (lp[i * (n + 1) + j] - max).exp();
            mx[i] += v;
            my[j] += v;
        }
    }
    let gx = GridCdf::from_pdf(xs.clone(), mx);
    let gy = GridCdf::from_pdf(xs, my);
    vec![
        ks("component_mean.x", &draws.iter().map(|t| t[0]).collect::<Vec<_>>(), &gx),
        ks("component_mean.y", &draws.iter().map(|t| t[1]).collect::<Vec<_>>(), &gy),
    ]
}

/// `Σ | θ`: the mean prior is collapsed onto a point so the covariance is
/// drawn given a known mean.
pub fn check_component_cov(inst: &Instance) -> Vec<Check> {
    let points: Vec<Vec2> = inst.data[..4].iter().map(|p| p.location).collect();
    let theta = [29.0, 25.0];
    let comp = BvnComponent::new(theta, SymMat2::new(16.0, 6.0, 12.0));
    let hp = Hyperparams {
        theta0: theta,
        sigma0: SymMat2::diag(1e-14, 1e-14),
        nu: 3.0,
        s0: SymMat2::new(4.0, 1.0, 3.0),
        ..inst.hp.clone()
    };
    let mut rng = RngStream::new(109, 0);
    let draws: Vec<SymMat2> = (0..DRAWS)
        .map(|_| update_component_params(&points, &comp, &hp, &mut rng).unwrap().cov)
        .collect();
    let ln_post = |c: &SymMat2| {
        ln_inv_wishart(c, hp.nu, &hp.s0) + points.iter().map(|&s| ln_bvn(s, theta, c)).sum::<f64>()
    };
    // Σ = L Lᵀ with L = [[a, 0], [b, c]] (Jacobian 4a²c) for the xx marginal,
    // and Σ = U Uᵀ with U = [[a, b], [0, c]] (Jacobian 4ac²) for yy.
    let (na, nb, nc) = (300, 240, 240);
    let (amax, bmax, cmax) = (40.0, 60.0, 40.0);
    let axis = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
    };
    let a_nodes = axis(na, 0.0, amax);
    let b_nodes = axis(nb, -bmax, bmax);
    let c_nodes = axis(nc, 0.0, cmax);
    let marginal = |lower: bool| -> Vec<f64> {
        let lps: Vec<Vec<f64>> = a_nodes
            .iter()
            .map(|&a| {
                let mut row = Vec::with_capacity(nb * nc);
                for &b in &b_nodes {
                    for &c in &c_nodes {
                        let (sig, jac) = if lower {
                            (SymMat2::new(a * a, a * b, b * b + c * c), 4.0 * a * a * c)
                        } else {
                            (SymMat2::new(a * a + b * b, b * c, c * c), 4.0 * a * c * c)
                        };
                        row.push(ln_post(&sig) + jac.ln());
                    }
                }
                row
            })
            .collect();
        let max = lps.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        // In the lower factor a is the xx root; in the upper one c is the yy root.
        if lower {
            lps.iter().map(|r| r.iter().map(|v| (v - max).exp()).sum()).collect()
        } else {
            let mut m = vec![0.0; nc];
            for r in &lps {
                for (idx, v) in r.iter().enumerate() {
                    m[idx % nc] += (v - max).exp();
                }
            }
            m
        }
    };
    let gx = GridCdf::from_pdf(a_nodes.clone(), marginal(true));
    let gy = GridCdf::from_pdf(c_nodes.clone(), marginal(false));
    vec![
        ks("component_cov.xx", &draws.iter().map(|s| s.xx.sqrt()).collect::<Vec<_>>(), &gx),
        ks("component_cov.yy", &draws.iter().map(|s| s.yy.sqrt()).collect::<Vec<_>>(), &gy),
    ]
}

pub fn all_conditional_checks() -> Vec<Check> {
    let inst = instance();
    let mut out = Vec::new();
    out.extend(check_gamma(&inst));
    out.extend(check_mark_params(&inst));
    out.extend(check_type_indicators(&inst));
    out.extend(check_type_probs(&inst));
    out.extend(check_dp_precision(&inst));
    out.extend(check_sticks(&inst));
    out.extend(check_component_indicators(&inst));
    out.extend(check_component_mean(&inst));
    out.extend(check_component_cov(&inst));
    out
}

/// Draws a full state from the prior, including labels, component
/// indicators and mark variances.
pub fn prior_state(n: usize, hp: &Hyperparams, cfg: &McmcConfig, rng: &mut RngStream) -> ModelState {
    let mut s = typedflow::sampler::sample_prior_state(n, hp, cfg, rng).unwrap();
    s.mark_params.var_link = inverse_gamma(rng, 0.5 * hp.nu0, 0.5 * hp.nu0 * hp.sigma0_sq);
    s.mark_params.var_dir = inverse_gamma(rng, 0.5 * hp.nu0, 0.5 * hp.nu0 * hp.sigma0_sq);
    for i in 0..n {
        let k = categorical(&s.type_probs, rng);
        s.labels[i] = TypeLabel::from_index(k);
        s.components[i] = categorical(&s.mixtures[k].weights, rng);
    }
    s.gamma = gamma(rng, hp.a0, hp.b0);
    s
}

fn categorical(p: &[f64], rng: &mut RngStream) -> usize {
    let u = rng.open_unit() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Scalar functions of a state compared by the joint-distribution test.
pub fn monitored(s: &ModelState) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for k in TypeLabel::ALL {
        let tag = typedflow::sampler::type_tag(k);
        let m = s.mixture(k);
        out.push((format!("p_{tag}"), s.type_prob(k)));
        out.push((format!("p_{tag}^2"), s.type_prob(k).powi(2)));
        out.push((format!("alpha_{tag}"), m.alpha));
        out.push((format!("w1_{tag}"), m.weights[0]));
        out.push((format!("theta1x_{tag}"), m.components[0].mean[0]));
        out.push((format!("theta1y_{tag}"), m.components[0].mean[1]));
        out.push((format!("sigma1xx_{tag}"), m.components[0].cov.xx));
        out.push((format!("sigma1xy_{tag}"), m.components[0].cov.xy));
        let share = s.labels.iter().filter(|&&c| c == k).count() as f64 / s.labels.len() as f64;
        out.push((format!("share_{tag}"), share));
    }
    out.push(("var_link".into(), s.mark_params.var_link));
    out.push(("var_dir".into(), s.mark_params.var_dir));
    out
}

/// Hyperparameters with finite prior moments for every monitored quantity.
pub fn geweke_hyperparams() -> Hyperparams {
    Hyperparams {
        nu0: 10.0,
        sigma0_sq: 1.0,
        theta0: [32.0, 32.0],
        sigma0: SymMat2::diag(25.0, 25.0),
        nu: 8.0,
        s0: SymMat2::diag(20.0, 20.0),
        truncation: 3,
        ..Hyperparams::default()
    }
}

pub struct GewekeResult {
    pub z: Vec<(String, f64)>,
}

impl GewekeResult {
    pub fn max_abs_z(&self) -> f64 {
        self.z.iter().map(|(_, z)| z.abs()).fold(0.0, f64::max)
    }
}

/// Marginal-conditional draws against a successive-conditional chain that
/// alternates one Gibbs sweep with a fresh dataset drawn given the state.
pub fn geweke(n: usize, transitions: usize, seed: u64) -> GewekeResult {
    geweke_with(geweke_hyperparams(), n, transitions, seed)
}

pub fn geweke_with(hp: Hyperparams, n: usize, transitions: usize, seed: u64) -> GewekeResult {
    use typedflow::simulate::generate_given_latents;
    let cfg = McmcConfig {
        iterations: transitions,
        burn_in: 0,
        thin: 1,
        seed,
        fix_mark_means: true,
        warmup: 0,
        ..McmcConfig::default()
    };
    let mut rng = RngStream::new(seed, 7);
    let iid: Vec<Vec<(String, f64)>> = (0..transitions)
        .map(|_| monitored(&prior_state(n, &hp, &cfg, &mut rng)))
        .collect();

    let start = prior_state(n, &hp, &cfg, &mut rng);
    let data = generate_given_latents(&start, &mut rng).unwrap();
    let mut sampler = Sampler::from_state(data, start, false, hp.clone(), cfg).unwrap();
    let mut chain = Vec::with_capacity(transitions);
    for _ in 0..transitions {
        sampler.sweep().unwrap();
        let data = generate_given_latents(sampler.state(), &mut rng).unwrap();
        sampler.replace_data(data).unwrap();
        chain.push(monitored(sampler.state()));
    }
    let names: Vec<String> = iid[0].iter().map(|(n, _)| n.clone()).collect();
    let z = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let a: Vec<f64> = iid.iter().map(|r| r[j].1).collect();
            let b: Vec<f64> = chain.iter().map(|r| r[j].1).collect();
            (name.clone(), typedflow::diagnostics::geweke_z(&a, &b))
        })
        .collect();
    GewekeResult { z }
}
