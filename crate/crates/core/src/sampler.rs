//! Data-augmented Gibbs sampler.
//!
//! Each sweep runs, in order:
//!
//! 1. mark parameters `μ_ℓ, μ_d, μ_{-d}, σ²_ℓ, σ²_d` given the type labels;
//! 2. type labels `c_i` (jointly with their component indicator `z_i`);
//! 3. type probabilities `p`;
//! 4. for each type: DP precision and stick weights, then component
//!    indicators, then component means and covariances.
//!
//! The intensity scale `γ` factorizes out of the posterior and is drawn on
//! its own stream, once per kept sample.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    beta, bvn, dirichlet3, gamma, inverse_gamma, sample_categorical_from_log_weights,
    sample_half_line_truncated_normal, sample_inverse_wishart, HalfLine, RngStream,
};
use crate::error::{Error, Result};
use crate::linalg::{sub2, SymMat2, Vec2};
use crate::model::{
    logit_transform, normal_log_density, weights_from_sticks, BvnComponent,
    BvnKernel, DataPoint, Hyperparams, MarkParams, ModelState, TypeLabel, TypedMixture,
};

/// Stream ids within one chain's seed.
const CHAIN_STREAM: u64 = 0;
const GAMMA_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Total iterations including burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Hold `μ_ℓ`, `μ_d` and `μ_{-d}` at the values below.
    pub fix_mark_means: bool,
    pub fixed_mu_l: f64,
    pub fixed_mu_d: f64,
    pub fixed_mu_neg_d: f64,
    /// Leading burn-in sweeps that classify points on their marks alone
    /// (capped at `burn_in`). See [`Sampler::sweep`].
    pub warmup: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 3000,
            burn_in: 1000,
            thin: 1,
            seed: 1,
            fix_mark_means: false,
            fixed_mu_l: 2.0,
            fixed_mu_d: 1.5,
            fixed_mu_neg_d: -1.5,
            warmup: 200,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.thin == 0 {
            return Err(Error::Config("iterations and thin must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config("burn_in must be smaller than iterations".into()));
        }
        if self.fix_mark_means
            && !(self.fixed_mu_l > 0.0 && self.fixed_mu_d > 0.0 && self.fixed_mu_neg_d < 0.0)
        {
            return Err(Error::Config("fixed mark means must satisfy mu_l > 0, mu_d > 0 > mu_-d".into()));
        }
        Ok(())
    }

    pub fn kept_count(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    /// Number of mark-only sweeps actually run.
    pub fn effective_warmup(&self) -> usize {
        self.warmup.min(self.burn_in)
    }
}

/// Named scalar traces, one value per kept sample.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Traces {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&mut self, name: impl Into<String>, column: Vec<f64>) {
        self.names.push(name.into());
        self.columns.push(column);
    }

    /// Builds the standard trace table from kept states. Component weights
    /// are sorted in decreasing order per draw so traces are label-free.
    pub fn from_draws(draws: &[ModelState]) -> Traces {
        let mut t = Traces::default();
        let col = |f: &dyn Fn(&ModelState) -> f64| draws.iter().map(f).collect::<Vec<_>>();
        t.push("gamma", col(&|s| s.gamma));
        t.push("p_fm", col(&|s| s.type_probs[0]));
        t.push("p_none", col(&|s| s.type_probs[1]));
        t.push("p_mf", col(&|s| s.type_probs[2]));
        t.push("male_source_fraction", col(&|s| s.male_source_fraction()));
        t.push("mu_link", col(&|s| s.mark_params.mu_link));
        t.push("mu_dir_mf", col(&|s| s.mark_params.mu_dir_mf));
        t.push("mu_dir_fm", col(&|s| s.mark_params.mu_dir_fm));
        t.push("var_link", col(&|s| s.mark_params.var_link));
        t.push("var_dir", col(&|s| s.mark_params.var_dir));
        for k in TypeLabel::ALL {
            t.push(format!("alpha_{}", type_tag(k)), col(&|s| s.mixture(k).alpha));
        }
        if let Some(first) = draws.first() {
            for k in TypeLabel::ALL {
                let h_max = first.mixture(k).truncation();
                let sorted: Vec<Vec<f64>> = draws
                    .iter()
                    .map(|s| {
                        let mut w = s.mixture(k).weights.clone();
                        w.sort_by(|a, b| b.total_cmp(a));
                        w
                    })
                    .collect();
                for h in 0..h_max {
                    t.push(
                        format!("w_{}_{}", type_tag(k), h + 1),
                        sorted.iter().map(|w| w[h]).collect(),
                    );
                }
            }
        }
        t
    }
}

/// Short tag used in file headers: `fm`, `none`, `mf`.
pub fn type_tag(k: TypeLabel) -> &'static str {
    match k {
        TypeLabel::FemaleToMale => "fm",
        TypeLabel::NoEvent => "none",
        TypeLabel::MaleToFemale => "mf",
    }
}

/// The stored chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub draws: Vec<ModelState>,
    pub traces: Traces,
    /// Per-point relative frequency of each type over kept draws, order `(-1, 0, +1)`.
    pub assignment_freq: Vec<[f64; 3]>,
}

impl PosteriorSamples {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn male_source_fraction(&self) -> Vec<f64> {
        self.draws.iter().map(ModelState::male_source_fraction).collect()
    }
}

/// One draw of `γ ~ Gamma(a0 + N, b0 + 1)` (shape–rate).
pub fn sample_gamma_scale(n: usize, hp: &Hyperparams, rng: &mut RngStream) -> f64 {
    gamma(rng, hp.a0 + n as f64, hp.b0 + 1.0)
}

/// Logit-scale scores cached per point; the direction entry is `None` for
/// extreme-direction points.
#[derive(Clone, Debug)]
struct MarkCache {
    link: Vec<f64>,
    dir: Vec<Option<f64>>,
}

impl MarkCache {
    fn new(data: &[DataPoint]) -> Result<Self> {
        let mut link = Vec::with_capacity(data.len());
        let mut dir = Vec::with_capacity(data.len());
        for p in data {
            link.push(logit_transform(p.linkage())?);
            dir.push(if p.extreme_direction {
                None
            } else {
                Some(logit_transform(p.direction())?)
            });
        }
        Ok(Self { link, dir })
    }
}

/// Full-conditional update of the mark parameters given type labels.
///
/// Mean draws use the variances from the previous iteration; the variance
/// draws then use the fresh means and pool the residuals of all points,
/// since no-event marks share the variances with mean zero. Groups with no points draw their mean
/// from the half-normal `N_(0,∞)(0, σ²)` (mirrored for `μ_{-d}`).
pub fn update_mark_params(
    data: &[DataPoint],
    labels: &[TypeLabel],
    mp: &MarkParams,
    hp: &Hyperparams,
    rng: &mut RngStream,
) -> Result<MarkParams> {
    let cache = MarkCache::new(data)?;
    Ok(update_marks_cached(&cache, labels, mp, hp, rng))
}

fn update_marks_cached(
    cache: &MarkCache,
    labels: &[TypeLabel],
    mp: &MarkParams,
    hp: &Hyperparams,
    rng: &mut RngStream,
) -> MarkParams {
    let mut sum_link = 0.0;
    let mut n_event = 0usize;
    let mut sum_dir = [0.0; 3];
    let mut n_dir = [0usize; 3];
    for (i, &c) in labels.iter().enumerate() {
        if c.is_event() {
            sum_link += cache.link[i];
            n_event += 1;
            if let Some(d) = cache.dir[i] {
                sum_dir[c.index()] += d;
                n_dir[c.index()] += 1;
            }
        }
    }
    let mean_draw = |rng: &mut RngStream, sum: f64, n: usize, var: f64, side: HalfLine| {
        if n == 0 {
            sample_half_line_truncated_normal(0.0, var, side, rng)
        } else {
            sample_half_line_truncated_normal(sum / n as f64, var / n as f64, side, rng)
        }
    };

    let mut out = *mp;
    let (fm, mf) = (TypeLabel::FemaleToMale.index(), TypeLabel::MaleToFemale.index());
    if !mp.fixed_means {
        out.mu_link = mean_draw(rng, sum_link, n_event, mp.var_link, HalfLine::Positive);
        out.mu_dir_mf = mean_draw(rng, sum_dir[mf], n_dir[mf], mp.var_dir, HalfLine::Positive);
        out.mu_dir_fm = mean_draw(rng, sum_dir[fm], n_dir[fm], mp.var_dir, HalfLine::Negative);
    }

    // Every point's marks carry the shared variances; no-event points have
    // mean zero. Extreme-direction points have no direction factor.
    let mut ss_link = 0.0;
    let mut ss_dir = 0.0;
    let mut n_dir_all = 0usize;
    for (i, &c) in labels.iter().enumerate() {
        ss_link += (cache.link[i] - out.link_mean(c)).powi(2);
        if let Some(d) = cache.dir[i] {
            ss_dir += (d - out.dir_mean(c)).powi(2);
            n_dir_all += 1;
        }
    }
    let prior_ss = hp.nu0 * hp.sigma0_sq;
    out.var_link = inverse_gamma(
        rng,
        0.5 * (hp.nu0 + labels.len() as f64),
        0.5 * (prior_ss + ss_link),
    );
    out.var_dir = inverse_gamma(rng, 0.5 * (hp.nu0 + n_dir_all as f64), 0.5 * (prior_ss + ss_dir));
    out
}

/// Counts per type in order `(-1, 0, +1)`.
pub fn type_counts(labels: &[TypeLabel]) -> [usize; 3] {
    let mut n = [0usize; 3];
    for c in labels {
        n[c.index()] += 1;
    }
    n
}

/// `p ~ Dirichlet(q + counts)`.
pub fn update_type_probs(labels: &[TypeLabel], hp: &Hyperparams, rng: &mut RngStream) -> [f64; 3] {
    let n = type_counts(labels);
    dirichlet3(rng, [hp.q[0] + n[0] as f64, hp.q[1] + n[1] as f64, hp.q[2] + n[2] as f64])
}

/// Log-weights and kernels of all three mixtures, ready for per-point evaluation.
struct PreparedMixtures {
    log_w: [Vec<f64>; 3],
    kernels: [Vec<BvnKernel>; 3],
}

impl PreparedMixtures {
    fn new(state: &ModelState) -> Result<Self> {
        let prep = |k: usize| -> Result<(Vec<f64>, Vec<BvnKernel>)> {
            let m = &state.mixtures[k];
            Ok((m.weights.iter().map(|w| w.ln()).collect(), m.kernels()?))
        };
        let (w0, k0) = prep(0)?;
        let (w1, k1) = prep(1)?;
        let (w2, k2) = prep(2)?;
        Ok(Self {
            log_w: [w0, w1, w2],
            kernels: [k0, k1, k2],
        })
    }

    /// Fills `terms` with `log w_h + log dBVN(s; θ_h, Σ_h)` and returns their log-sum-exp.
    #[inline]
    fn component_terms(&self, k: usize, s: Vec2, terms: &mut Vec<f64>) -> f64 {
        terms.clear();
        let mut max = f64::NEG_INFINITY;
        for (lw, kern) in self.log_w[k].iter().zip(&self.kernels[k]) {
            let t = if *lw > f64::NEG_INFINITY {
                lw + kern.log_density(s)
            } else {
                f64::NEG_INFINITY
            };
            max = max.max(t);
            terms.push(t);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }
}

/// Draws every `c_i` from `Pr(c_i = k) ∝ p_k f_k(s_i) φ_k(x_i)` and then its
/// component indicator `z_i` given the new type.
///
/// Extreme-direction points drop the direction factor; a nonzero draw is
/// then forced to `+1` when the raw score is 1 and to `-1` when it is 0.
pub fn update_type_indicators(
    data: &[DataPoint],
    state: &ModelState,
    rng: &mut RngStream,
) -> Result<(Vec<TypeLabel>, Vec<usize>)> {
    draw_labels(data, &MarkCache::new(data)?, state, true, rng)
}

/// Label draw shared by the sweep and [`update_type_indicators`]; without
/// `spatial` the location factor is left out.
fn draw_labels(
    data: &[DataPoint],
    marks: &MarkCache,
    state: &ModelState,
    spatial: bool,
    rng: &mut RngStream,
) -> Result<(Vec<TypeLabel>, Vec<usize>)> {
    let prep = PreparedMixtures::new(state)?;
    let mp = &state.mark_params;
    let mut labels = Vec::with_capacity(data.len());
    let mut comps = Vec::with_capacity(data.len());
    let mut scratch = Scratch::default();
    for (i, p) in data.iter().enumerate() {
        let mut terms = [0.0; 3];
        for k in TypeLabel::ALL {
            let mut v = normal_log_density(marks.link[i], mp.link_mean(k), mp.var_link);
            if let Some(d) = marks.dir[i] {
                v += normal_log_density(d, mp.dir_mean(k), mp.var_dir);
            }
            terms[k.index()] = v;
        }
        let (c, z) = draw_type_and_component(p, &terms, &state.type_probs, &prep, spatial, &mut scratch, rng)
            .map_err(|e| match e {
                Error::DegenerateWeights => Error::NonFinite {
                    iteration: 0,
                    param: format!("type weights of point {}", i + 1),
                },
                other => other,
            })?;
        labels.push(c);
        comps.push(z);
    }
    Ok((labels, comps))
}

#[derive(Default)]
struct Scratch {
    terms: [Vec<f64>; 3],
}

fn draw_type_and_component(
    p: &DataPoint,
    mark_terms: &[f64; 3],
    type_probs: &[f64; 3],
    prep: &PreparedMixtures,
    spatial: bool,
    scratch: &mut Scratch,
    rng: &mut RngStream,
) -> Result<(TypeLabel, usize)> {
    let mut log_w = [0.0; 3];
    for k in 0..3 {
        let lf = prep.component_terms(k, p.location, &mut scratch.terms[k]);
        let lf = if spatial || lf == f64::NEG_INFINITY { lf } else { 0.0 };
        log_w[k] = type_probs[k].ln() + lf + mark_terms[k];
    }
    let mut c = TypeLabel::from_index(sample_categorical_from_log_weights(&log_w, rng)?);
    if p.extreme_direction && c.is_event() {
        c = if p.direction() >= 1.0 {
            TypeLabel::MaleToFemale
        } else {
            TypeLabel::FemaleToMale
        };
    }
    let z = sample_categorical_from_log_weights(&scratch.terms[c.index()], rng)?;
    Ok((c, z))
}

/// Truncated stick-breaking update:
/// `v_h ~ Beta(1 + m_h, α + Σ_{l>h} m_l)` for `h < H`, `v_H = 1`.
pub fn update_stick_breaking_weights(mix: &TypedMixture, counts: &[usize], rng: &mut RngStream) -> TypedMixture {
    let h_max = mix.truncation();
    let mut tail: usize = counts.iter().sum();
    let mut sticks = Vec::with_capacity(h_max);
    for h in 0..h_max {
        tail -= counts[h];
        if h + 1 == h_max {
            sticks.push(1.0);
        } else {
            sticks.push(beta(rng, 1.0 + counts[h] as f64, mix.alpha + tail as f64));
        }
    }
    let weights = weights_from_sticks(&sticks);
    TypedMixture {
        sticks,
        weights,
        components: mix.components.clone(),
        alpha: mix.alpha,
    }
}

/// Odds `π / (1 − π)` of the higher-shape Gamma in the auxiliary-variable
/// precision update.
pub fn dp_precision_mixture_odds(eta: f64, occupied: usize, n: usize, hp: &Hyperparams) -> f64 {
    (hp.alpha_shape + occupied as f64 - 1.0) / (n as f64 * (hp.alpha_rate - eta.ln()))
}

/// Auxiliary-variable update of a DP precision given `occupied` non-empty
/// components among `n` points. With `n = 0` the prior is returned.
pub fn update_dp_precision(alpha: f64, occupied: usize, n: usize, hp: &Hyperparams, rng: &mut RngStream) -> f64 {
    if n == 0 {
        return gamma(rng, hp.alpha_shape, hp.alpha_rate);
    }
    let eta = beta(rng, alpha + 1.0, n as f64);
    let rate = hp.alpha_rate - eta.ln();
    let odds = dp_precision_mixture_odds(eta, occupied, n, hp);
    let pi = odds / (1.0 + odds);
    let shape = if rng.open_unit() < pi {
        hp.alpha_shape + occupied as f64
    } else {
        hp.alpha_shape + occupied as f64 - 1.0
    };
    gamma(rng, shape.max(f64::MIN_POSITIVE), rate)
}

/// Draws `z` for each location from `∝ w_h dBVN(s; θ_h, Σ_h)`.
pub fn update_component_indicators(points: &[Vec2], mix: &TypedMixture, rng: &mut RngStream) -> Result<Vec<usize>> {
    let log_w: Vec<f64> = mix.weights.iter().map(|w| w.ln()).collect();
    let kernels = mix.kernels()?;
    let mut terms = Vec::with_capacity(log_w.len());
    points
        .iter()
        .map(|&s| {
            terms.clear();
            terms.extend(log_w.iter().zip(&kernels).map(|(lw, k)| lw + k.log_density(s)));
            sample_categorical_from_log_weights(&terms, rng)
        })
        .collect()
}

/// Semi-conjugate update of one component given its assigned locations:
/// the mean given the current covariance, then the covariance given the new mean.
pub fn update_component_params(
    points: &[Vec2],
    comp: &BvnComponent,
    hp: &Hyperparams,
    rng: &mut RngStream,
) -> Result<BvnComponent> {
    let m = points.len() as f64;
    let cov_inv = comp.cov.inverse()?;
    let prior_inv = hp.sigma0.inverse()?;
    let precision = cov_inv.scale(m).add(&prior_inv);
    let post_cov = precision.inverse()?;
    let mut sum = [0.0, 0.0];
    for s in points {
        sum[0] += s[0];
        sum[1] += s[1];
    }
    let a = cov_inv.mul_vec(sum);
    let b = prior_inv.mul_vec(hp.theta0);
    let post_mean = post_cov.mul_vec([a[0] + b[0], a[1] + b[1]]);
    let mean = bvn(rng, post_mean, &post_cov)?;

    let mut scatter = hp.s0;
    for s in points {
        scatter = scatter.add(&SymMat2::outer(sub2(*s, mean)));
    }
    let cov = sample_inverse_wishart(hp.nu + m, &scatter, rng)?;
    Ok(BvnComponent::new(mean, cov))
}

/// Draws the full parameter set from the priors. Mark means, whose priors
/// are flat on a half-line, start from half-normals with variance `σ0²`;
/// mark variances start at `σ0²`.
pub fn sample_prior_state(n: usize, hp: &Hyperparams, cfg: &McmcConfig, rng: &mut RngStream) -> Result<ModelState> {
    let type_probs = dirichlet3(rng, hp.q);
    let mixtures = [
        sample_prior_mixture(hp, rng)?,
        sample_prior_mixture(hp, rng)?,
        sample_prior_mixture(hp, rng)?,
    ];
    let mark_params = if cfg.fix_mark_means {
        MarkParams {
            mu_link: cfg.fixed_mu_l,
            mu_dir_mf: cfg.fixed_mu_d,
            mu_dir_fm: cfg.fixed_mu_neg_d,
            var_link: hp.sigma0_sq,
            var_dir: hp.sigma0_sq,
            fixed_means: true,
        }
    } else {
        MarkParams {
            mu_link: sample_half_line_truncated_normal(0.0, hp.sigma0_sq, HalfLine::Positive, rng),
            mu_dir_mf: sample_half_line_truncated_normal(0.0, hp.sigma0_sq, HalfLine::Positive, rng),
            mu_dir_fm: sample_half_line_truncated_normal(0.0, hp.sigma0_sq, HalfLine::Negative, rng),
            var_link: hp.sigma0_sq,
            var_dir: hp.sigma0_sq,
            fixed_means: false,
        }
    };
    let labels = (0..n)
        .map(|_| TypeLabel::from_index(rng.random_index(3)))
        .collect();
    let components = (0..n).map(|_| rng.random_index(hp.truncation)).collect();
    Ok(ModelState {
        gamma: hp.a0 / hp.b0,
        type_probs,
        mixtures,
        mark_params,
        labels,
        components,
    })
}

/// One truncated stick-breaking mixture drawn from the prior.
pub fn sample_prior_mixture(hp: &Hyperparams, rng: &mut RngStream) -> Result<TypedMixture> {
    let alpha = gamma(rng, hp.alpha_shape, hp.alpha_rate);
    let h_max = hp.truncation;
    let sticks: Vec<f64> = (0..h_max)
        .map(|h| if h + 1 == h_max { 1.0 } else { beta(rng, 1.0, alpha) })
        .collect();
    let components = (0..h_max)
        .map(|_| {
            Ok(BvnComponent::new(
                bvn(rng, hp.theta0, &hp.sigma0)?,
                sample_inverse_wishart(hp.nu, &hp.s0, rng)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    TypedMixture::from_sticks(sticks, components, alpha)
}

/// Over-split starting partition: per type, `H` member points are picked at
/// random as seeds and every member joins its nearest seed. Gibbs moves can
/// merge components but a component's prior draw rarely lands near the
/// data, so the chain starts from many small clusters rather than one.
pub fn seed_component_indicators(
    data: &[DataPoint],
    labels: &[TypeLabel],
    truncation: usize,
    rng: &mut RngStream,
) -> Vec<usize> {
    let mut z = vec![0usize; data.len()];
    for k in TypeLabel::ALL {
        let members: Vec<usize> = (0..data.len()).filter(|&i| labels[i] == k).collect();
        if members.is_empty() {
            continue;
        }
        let seeds: Vec<Vec2> = (0..truncation)
            .map(|_| data[members[rng.random_index(members.len())]].location)
            .collect();
        for &i in &members {
            let s = data[i].location;
            let mut best = (f64::INFINITY, 0);
            for (h, c) in seeds.iter().enumerate() {
                let d = (s[0] - c[0]).powi(2) + (s[1] - c[1]).powi(2);
                if d < best.0 {
                    best = (d, h);
                }
            }
            z[i] = best.1;
        }
    }
    z
}

trait RandomIndex {
    fn random_index(&mut self, n: usize) -> usize;
}

impl RandomIndex for RngStream {
    fn random_index(&mut self, n: usize) -> usize {
        use rand::Rng;
        self.random_range(0..n)
    }
}

/// A running chain. Exposes single sweeps so callers can interleave their
/// own steps (e.g. joint-distribution tests that redraw data between sweeps).
pub struct Sampler {
    data: Vec<DataPoint>,
    marks: MarkCache,
    hp: Hyperparams,
    cfg: McmcConfig,
    fixed_labels: bool,
    state: ModelState,
    rng: RngStream,
    iteration: usize,
    warmup: usize,
}

impl Sampler {
    /// Random initialization: labels and component indicators uniform, Θ from
    /// the priors, followed by one draw of the spatial and type parameters
    /// given those random labels so that components start in the data region.
    pub fn new(data: Vec<DataPoint>, hp: Hyperparams, cfg: McmcConfig) -> Result<Self> {
        Self::init(data, None, hp, cfg)
    }

    /// Subset-analysis chain: the labels are frozen and never resampled.
    pub fn with_fixed_types(data: Vec<DataPoint>, labels: Vec<TypeLabel>, hp: Hyperparams, cfg: McmcConfig) -> Result<Self> {
        if labels.len() != data.len() {
            return Err(Error::invalid("one fixed label per point is required"));
        }
        Self::init(data, Some(labels), hp, cfg)
    }

    /// Starts from a caller-supplied state without any warm-up draws.
    pub fn from_state(
        data: Vec<DataPoint>,
        state: ModelState,
        fixed_labels: bool,
        hp: Hyperparams,
        cfg: McmcConfig,
    ) -> Result<Self> {
        hp.validate()?;
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::invalid("cannot sample with an empty dataset"));
        }
        state.validate()?;
        if state.labels.len() != data.len() {
            return Err(Error::invalid("state labels do not match the data"));
        }
        let marks = MarkCache::new(&data)?;
        Ok(Self {
            data,
            marks,
            hp,
            rng: RngStream::new(cfg.seed, CHAIN_STREAM),
            cfg,
            fixed_labels,
            state,
            iteration: 0,
            warmup: 0,
        })
    }

    fn init(data: Vec<DataPoint>, labels: Option<Vec<TypeLabel>>, hp: Hyperparams, cfg: McmcConfig) -> Result<Self> {
        hp.validate()?;
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::invalid("cannot sample with an empty dataset"));
        }
        let marks = MarkCache::new(&data)?;
        let mut rng = RngStream::new(cfg.seed, CHAIN_STREAM);
        let mut state = sample_prior_state(data.len(), &hp, &cfg, &mut rng)?;
        let fixed_labels = labels.is_some();
        if let Some(l) = labels {
            state.labels = l;
        }
        state.components = seed_component_indicators(&data, &state.labels, hp.truncation, &mut rng);
        let warmup = if fixed_labels { 0 } else { cfg.effective_warmup() };
        let mut sampler = Self {
            data,
            marks,
            hp,
            cfg,
            fixed_labels,
            state,
            rng,
            iteration: 0,
            warmup,
        };
        sampler.state.type_probs = update_type_probs(&sampler.state.labels, &sampler.hp, &mut sampler.rng);
        sampler.update_mixtures()?;
        Ok(sampler)
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn data(&self) -> &[DataPoint] {
        &self.data
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Swaps in a new dataset of the same size, keeping the current state.
    pub fn replace_data(&mut self, data: Vec<DataPoint>) -> Result<()> {
        if data.len() != self.data.len() {
            return Err(Error::invalid("replacement data must keep the point count"));
        }
        self.marks = MarkCache::new(&data)?;
        self.data = data;
        Ok(())
    }

    /// One full Gibbs sweep.
    ///
    /// Chains built with [`Sampler::new`] or [`Sampler::with_fixed_types`]
    /// spend their first `effective_warmup()` sweeps drawing labels from
    /// `p_k φ_k(x_i)` without the spatial factor. Starting from random
    /// labels the mark parameters are too diffuse to separate the types, and
    /// a type or component that empties early is only reborn from the vague
    /// prior. After the warm-up the component indicators are re-seeded and
    /// every later sweep is the exact Gibbs update.
    pub fn sweep(&mut self) -> Result<()> {
        self.iteration += 1;
        let warming = self.iteration <= self.warmup;
        self.state.mark_params = update_marks_cached(
            &self.marks,
            &self.state.labels,
            &self.state.mark_params,
            &self.hp,
            &mut self.rng,
        );
        if !self.fixed_labels {
            self.update_labels(!warming)?;
        }
        self.state.type_probs = update_type_probs(&self.state.labels, &self.hp, &mut self.rng);
        if warming && self.iteration == self.warmup {
            self.state.components =
                seed_component_indicators(&self.data, &self.state.labels, self.hp.truncation, &mut self.rng);
            self.update_mixture_params()?;
        }
        self.update_mixtures()?;
        self.check_finite()
    }

    fn update_labels(&mut self, spatial: bool) -> Result<()> {
        let (labels, comps) = draw_labels(&self.data, &self.marks, &self.state, spatial, &mut self.rng)
            .map_err(|e| match e {
                Error::NonFinite { param, .. } => Error::NonFinite {
                    iteration: self.iteration,
                    param,
                },
                other => other,
            })?;
        self.state.labels = labels;
        self.state.components = comps;
        Ok(())
    }

    /// Step 4 for every type.
    fn update_mixtures(&mut self) -> Result<()> {
        let mut members: [Vec<usize>; 3] = Default::default();
        for (i, c) in self.state.labels.iter().enumerate() {
            members[c.index()].push(i);
        }
        for k in 0..3 {
            let idx = &members[k];
            let h_max = self.state.mixtures[k].truncation();
            let mut counts = vec![0usize; h_max];
            for &i in idx {
                counts[self.state.components[i]] += 1;
            }
            let occupied = counts.iter().filter(|&&m| m > 0).count();
            let mix = &mut self.state.mixtures[k];
            mix.alpha = update_dp_precision(mix.alpha, occupied, idx.len(), &self.hp, &mut self.rng);
            *mix = update_stick_breaking_weights(mix, &counts, &mut self.rng);

            let points: Vec<Vec2> = idx.iter().map(|&i| self.data[i].location).collect();
            let z = update_component_indicators(&points, mix, &mut self.rng)?;
            for (j, &i) in idx.iter().enumerate() {
                self.state.components[i] = z[j];
            }
            self.update_type_components(k)?;
        }
        Ok(())
    }

    fn update_mixture_params(&mut self) -> Result<()> {
        for k in 0..3 {
            self.update_type_components(k)?;
        }
        Ok(())
    }

    /// Means and covariances of type `k`'s components given labels and indicators.
    fn update_type_components(&mut self, k: usize) -> Result<()> {
        let mix = &mut self.state.mixtures[k];
        let mut groups: Vec<Vec<Vec2>> = vec![Vec::new(); mix.truncation()];
        for (i, c) in self.state.labels.iter().enumerate() {
            if c.index() == k {
                groups[self.state.components[i]].push(self.data[i].location);
            }
        }
        for (h, group) in groups.iter().enumerate() {
            mix.components[h] = update_component_params(group, &mix.components[h], &self.hp, &mut self.rng)?;
        }
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        let fail = |param: &str| {
            Err(Error::NonFinite {
                iteration: self.iteration,
                param: param.to_string(),
            })
        };
        let s = &self.state;
        if s.type_probs.iter().any(|p| !p.is_finite()) {
            return fail("type_probs");
        }
        let mp = &s.mark_params;
        for (name, v) in [
            ("mu_link", mp.mu_link),
            ("mu_dir_mf", mp.mu_dir_mf),
            ("mu_dir_fm", mp.mu_dir_fm),
            ("var_link", mp.var_link),
            ("var_dir", mp.var_dir),
        ] {
            if !v.is_finite() {
                return fail(name);
            }
        }
        for (k, m) in s.mixtures.iter().enumerate() {
            let tag = type_tag(TypeLabel::from_index(k));
            if !m.alpha.is_finite() {
                return fail(&format!("alpha_{tag}"));
            }
            if m.weights.iter().any(|w| !w.is_finite()) {
                return fail(&format!("weights_{tag}"));
            }
            for (h, c) in m.components.iter().enumerate() {
                if !(c.mean[0].is_finite() && c.mean[1].is_finite() && c.cov.is_finite()) {
                    return fail(&format!("component_{tag}_{}", h + 1));
                }
            }
        }
        Ok(())
    }
}

/// Runs a full chain with latent types.
pub fn run_mcmc(data: &[DataPoint], hp: &Hyperparams, cfg: &McmcConfig) -> Result<PosteriorSamples> {
    let sampler = Sampler::new(data.to_vec(), hp.clone(), cfg.clone())?;
    collect(sampler)
}

/// Runs a chain with frozen type labels.
pub fn run_mcmc_fixed_types(
    data: &[DataPoint],
    labels: &[TypeLabel],
    hp: &Hyperparams,
    cfg: &McmcConfig,
) -> Result<PosteriorSamples> {
    let sampler = Sampler::with_fixed_types(data.to_vec(), labels.to_vec(), hp.clone(), cfg.clone())?;
    collect(sampler)
}

/// Runs the configured number of sweeps on an initialized sampler.
pub fn collect(mut sampler: Sampler) -> Result<PosteriorSamples> {
    let cfg = sampler.cfg.clone();
    let n = sampler.data.len();
    let mut gamma_rng = RngStream::new(cfg.seed, GAMMA_STREAM);
    let mut draws = Vec::with_capacity(cfg.kept_count());
    let mut counts = vec![[0usize; 3]; n];
    for t in 1..=cfg.iterations {
        sampler.sweep()?;
        if t > cfg.burn_in && (t - cfg.burn_in).is_multiple_of(cfg.thin) {
            let mut snap = sampler.state.clone();
            snap.gamma = sample_gamma_scale(n, &sampler.hp, &mut gamma_rng);
            for (cnt, c) in counts.iter_mut().zip(&snap.labels) {
                cnt[c.index()] += 1;
            }
            draws.push(snap);
        }
    }
    let kept = draws.len().max(1) as f64;
    let assignment_freq = counts
        .iter()
        .map(|c| {
            let f = [c[0] as f64 / kept, c[1] as f64 / kept, c[2] as f64 / kept];
            // close the simplex exactly
            [f[0], 1.0 - f[0] - f[2], f[2]]
        })
        .collect();
    let traces = Traces::from_draws(&draws);
    Ok(PosteriorSamples {
        draws,
        traces,
        assignment_freq,
    })
}
