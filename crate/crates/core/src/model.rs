//! Domain types and the model's densities.
//!
//! A point is a pair of ages `s = (male_age, female_age)` with a mark
//! `x = (linkage, direction)`. Conditional on its latent type `k`, the point
//! contributes `γ p_k f_k(s) φ_k(x)` to the complete-data likelihood, where
//! `f_k` is a truncated stick-breaking mixture of bivariate normals and
//! `φ_k` is a product of two normals on the logit scale.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{sub2, Chol2, SymMat2, Vec2};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Latent event type of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum TypeLabel {
    /// `-1`: transmission from the female to the male.
    FemaleToMale,
    /// `0`: no transmission between the two individuals.
    NoEvent,
    /// `+1`: transmission from the male to the female.
    MaleToFemale,
}

impl TypeLabel {
    /// All types in storage order `(-1, 0, +1)`.
    pub const ALL: [TypeLabel; 3] = [
        TypeLabel::FemaleToMale,
        TypeLabel::NoEvent,
        TypeLabel::MaleToFemale,
    ];

    pub fn value(self) -> i8 {
        match self {
            TypeLabel::FemaleToMale => -1,
            TypeLabel::NoEvent => 0,
            TypeLabel::MaleToFemale => 1,
        }
    }

    /// Position in per-type arrays: `-1 → 0`, `0 → 1`, `+1 → 2`.
    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn from_index(i: usize) -> TypeLabel {
        TypeLabel::ALL[i]
    }

    pub fn from_value(v: i64) -> Result<TypeLabel> {
        match v {
            -1 => Ok(TypeLabel::FemaleToMale),
            0 => Ok(TypeLabel::NoEvent),
            1 => Ok(TypeLabel::MaleToFemale),
            _ => Err(Error::invalid(format!("type label must be -1, 0 or 1, got {v}"))),
        }
    }

    pub fn is_event(self) -> bool {
        self != TypeLabel::NoEvent
    }

    /// Age axis of the source individual (0 = male, 1 = female), `None` for no event.
    pub fn source_axis(self) -> Option<usize> {
        match self {
            TypeLabel::MaleToFemale => Some(0),
            TypeLabel::FemaleToMale => Some(1),
            TypeLabel::NoEvent => None,
        }
    }
}

impl From<TypeLabel> for i8 {
    fn from(t: TypeLabel) -> i8 {
        t.value()
    }
}

impl TryFrom<i8> for TypeLabel {
    type Error = Error;
    fn try_from(v: i8) -> Result<TypeLabel> {
        TypeLabel::from_value(v as i64)
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// One candidate pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    /// `(male_age, female_age)` in years.
    pub location: Vec2,
    /// `(linkage_score, direction_score)`.
    pub mark: Vec2,
    /// Raw direction score was exactly 0 or 1.
    pub extreme_direction: bool,
}

impl DataPoint {
    /// Builds a point from raw scores; the extreme-direction flag is derived.
    pub fn new(male_age: f64, female_age: f64, linkage: f64, direction: f64) -> Self {
        Self {
            location: [male_age, female_age],
            mark: [linkage, direction],
            extreme_direction: direction == 0.0 || direction == 1.0,
        }
    }

    pub fn linkage(&self) -> f64 {
        self.mark[0]
    }

    pub fn direction(&self) -> f64 {
        self.mark[1]
    }
}

/// Age observation window `[min, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeDomain {
    pub min: f64,
    pub max: f64,
}

impl AgeDomain {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, a: f64) -> bool {
        a >= self.min && a < self.max
    }

    pub fn contains_point(&self, s: Vec2) -> bool {
        self.contains(s[0]) && self.contains(s[1])
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

impl Default for AgeDomain {
    fn default() -> Self {
        AgeDomain::new(15.0, 50.0)
    }
}

/// A bivariate normal mixture component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BvnComponent {
    pub mean: Vec2,
    pub cov: SymMat2,
}

impl BvnComponent {
    pub fn new(mean: Vec2, cov: SymMat2) -> Self {
        Self { mean, cov }
    }

    pub fn kernel(&self) -> Result<BvnKernel> {
        BvnKernel::new(self)
    }
}

/// A component with its Cholesky factor cached for repeated evaluation.
#[derive(Clone, Copy, Debug)]
pub struct BvnKernel {
    mean: Vec2,
    chol: Chol2,
    log_norm: f64,
}

impl BvnKernel {
    pub fn new(comp: &BvnComponent) -> Result<Self> {
        let chol = comp.cov.cholesky()?;
        Ok(Self {
            mean: comp.mean,
            chol,
            log_norm: -LN_2PI - 0.5 * chol.log_det(),
        })
    }

    #[inline]
    pub fn log_density(&self, s: Vec2) -> f64 {
        let z = self.chol.solve_lower(sub2(s, self.mean));
        self.log_norm - 0.5 * (z[0] * z[0] + z[1] * z[1])
    }
}

/// Log density of a bivariate normal at `s`.
pub fn bvn_log_density(s: Vec2, comp: &BvnComponent) -> Result<f64> {
    Ok(BvnKernel::new(comp)?.log_density(s))
}

/// Stick-breaking weights `w_h = v_h ∏_{l<h} (1 - v_l)`.
pub fn weights_from_sticks(sticks: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    sticks
        .iter()
        .map(|&v| {
            let w = v * rest;
            rest *= 1.0 - v;
            w
        })
        .collect()
}

/// Inverse of [`weights_from_sticks`]; the final stick is always 1.
pub fn sticks_from_weights(weights: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    let n = weights.len();
    weights
        .iter()
        .enumerate()
        .map(|(h, &w)| {
            if h + 1 == n {
                return 1.0;
            }
            let v = if rest > 0.0 { (w / rest).clamp(0.0, 1.0) } else { 0.0 };
            rest -= w;
            v
        })
        .collect()
}

/// Per-type truncated stick-breaking mixture of bivariate normals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypedMixture {
    pub sticks: Vec<f64>,
    pub weights: Vec<f64>,
    pub components: Vec<BvnComponent>,
    /// DP precision.
    pub alpha: f64,
}

impl TypedMixture {
    pub fn from_sticks(sticks: Vec<f64>, components: Vec<BvnComponent>, alpha: f64) -> Result<Self> {
        if sticks.is_empty() || sticks.len() != components.len() {
            return Err(Error::invalid("sticks and components must be non-empty and equal length"));
        }
        if *sticks.last().unwrap() != 1.0 {
            return Err(Error::invalid("final stick must equal 1"));
        }
        if sticks.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("sticks must lie in [0, 1]"));
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid("DP precision must be positive"));
        }
        let weights = weights_from_sticks(&sticks);
        Ok(Self {
            sticks,
            weights,
            components,
            alpha,
        })
    }

    pub fn from_weights(weights: &[f64], components: Vec<BvnComponent>, alpha: f64) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("mixture weights must be a probability vector"));
        }
        Self::from_sticks(sticks_from_weights(weights), components, alpha)
    }

    pub fn truncation(&self) -> usize {
        self.components.len()
    }

    pub fn kernels(&self) -> Result<Vec<BvnKernel>> {
        self.components.iter().map(BvnKernel::new).collect()
    }

    /// Checks the weight simplex, the final stick, and component SPD-ness.
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::invalid(format!("mixture weights off the simplex (sum {total})")));
        }
        if self.sticks.last() != Some(&1.0) {
            return Err(Error::invalid("final stick must equal 1"));
        }
        for c in &self.components {
            c.cov.cholesky()?;
        }
        Ok(())
    }
}

/// `log f_k(s)` accumulated with log-sum-exp.
pub fn type_log_density(s: Vec2, mix: &TypedMixture) -> Result<f64> {
    let kernels = mix.kernels()?;
    Ok(mixture_log_density(s, &mix.weights, &kernels))
}

pub(crate) fn mixture_log_density(s: Vec2, weights: &[f64], kernels: &[BvnKernel]) -> f64 {
    let terms: Vec<f64> = weights
        .iter()
        .zip(kernels)
        .map(|(&w, k)| if w > 0.0 { w.ln() + k.log_density(s) } else { f64::NEG_INFINITY })
        .collect();
    log_sum_exp(&terms)
}

/// `f_k(s) = Σ_h w_h dBVN(s; θ_h, Σ_h)`.
pub fn type_density_eval(s: Vec2, mix: &TypedMixture) -> Result<f64> {
    Ok(type_log_density(s, mix)?.exp())
}

/// Numerically stable `log Σ exp(x_i)`; `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

pub fn logit_transform(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain { value: x });
    }
    Ok((x / (1.0 - x)).ln())
}

pub fn expit(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

pub fn normal_log_density(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln()) - 0.5 * d * d / var
}

/// Parameters of the logit-normal mark model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkParams {
    /// `μ_ℓ > 0`, logit-scale linkage mean for events.
    pub mu_link: f64,
    /// `μ_d > 0`, logit-scale direction mean for male-to-female events.
    pub mu_dir_mf: f64,
    /// `μ_{-d} < 0`, logit-scale direction mean for female-to-male events.
    pub mu_dir_fm: f64,
    pub var_link: f64,
    pub var_dir: f64,
    /// Means held fixed; only the variances are sampled.
    pub fixed_means: bool,
}

impl MarkParams {
    pub fn link_mean(&self, k: TypeLabel) -> f64 {
        if k.is_event() {
            self.mu_link
        } else {
            0.0
        }
    }

    pub fn dir_mean(&self, k: TypeLabel) -> f64 {
        match k {
            TypeLabel::MaleToFemale => self.mu_dir_mf,
            TypeLabel::FemaleToMale => self.mu_dir_fm,
            TypeLabel::NoEvent => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_link > 0.0 && self.mu_dir_mf > 0.0 && self.mu_dir_fm < 0.0) {
            return Err(Error::invalid("mark means must satisfy mu_link > 0, mu_d > 0 > mu_-d"));
        }
        if !(self.var_link > 0.0 && self.var_dir > 0.0) {
            return Err(Error::invalid("mark variances must be positive"));
        }
        Ok(())
    }
}

/// `log φ_k(x)` on logit-transformed scores.
pub fn mark_log_density(x: Vec2, k: TypeLabel, mp: &MarkParams) -> Result<f64> {
    let l = logit_transform(x[0])?;
    let d = logit_transform(x[1])?;
    Ok(normal_log_density(l, mp.link_mean(k), mp.var_link)
        + normal_log_density(d, mp.dir_mean(k), mp.var_dir))
}

/// Linkage factor only, for points whose direction score is extreme.
pub fn link_log_density(x: Vec2, k: TypeLabel, mp: &MarkParams) -> Result<f64> {
    let l = logit_transform(x[0])?;
    Ok(normal_log_density(l, mp.link_mean(k), mp.var_link))
}

/// Mark term used by the likelihood and the sampler: drops the direction
/// factor for extreme-direction points.
pub fn point_mark_log_density(p: &DataPoint, k: TypeLabel, mp: &MarkParams) -> Result<f64> {
    if p.extreme_direction {
        link_log_density(p.mark, k, mp)
    } else {
        mark_log_density(p.mark, k, mp)
    }
}

/// Prior constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Gamma(shape, rate) prior on γ.
    pub a0: f64,
    pub b0: f64,
    /// inv-Gamma(ν0/2, ν0σ0²/2) prior on both mark variances.
    pub nu0: f64,
    pub sigma0_sq: f64,
    /// Dirichlet prior on the type probabilities, order `(-1, 0, +1)`.
    pub q: [f64; 3],
    /// BVN prior on component means.
    pub theta0: Vec2,
    pub sigma0: SymMat2,
    /// inverse-Wishart prior on component covariances.
    pub nu: f64,
    pub s0: SymMat2,
    /// Gamma(shape, rate) prior on each DP precision.
    pub alpha_shape: f64,
    pub alpha_rate: f64,
    /// Stick-breaking truncation level per type.
    pub truncation: usize,
    pub domain: AgeDomain,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            a0: 1.0,
            b0: 0.02,
            nu0: 2.0,
            sigma0_sq: 1.0,
            q: [1.0, 1.0, 1.0],
            theta0: [0.0, 0.0],
            sigma0: SymMat2::diag(1e4, 1e4),
            nu: 2.0,
            s0: SymMat2::identity(),
            alpha_shape: 2.0,
            alpha_rate: 3.0,
            truncation: 30,
            domain: AgeDomain::default(),
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("a0", self.a0),
            ("b0", self.b0),
            ("nu0", self.nu0),
            ("sigma0_sq", self.sigma0_sq),
            ("q[-1]", self.q[0]),
            ("q[0]", self.q[1]),
            ("q[+1]", self.q[2]),
            ("nu", self.nu),
            ("alpha_shape", self.alpha_shape),
            ("alpha_rate", self.alpha_rate),
        ];
        for (name, v) in scalars {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.nu <= 1.0 {
            return Err(Error::Config("nu must exceed 1 for 2x2 inverse-Wishart".into()));
        }
        if !self.sigma0.is_spd() || !self.s0.is_spd() {
            return Err(Error::Config("sigma0 and s0 must be positive definite".into()));
        }
        if self.truncation < 2 {
            return Err(Error::Config("truncation must be at least 2".into()));
        }
        if !(self.domain.min < self.domain.max) {
            return Err(Error::Config("age domain must satisfy min < max".into()));
        }
        Ok(())
    }
}

/// Parameters plus latent indicators at one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub gamma: f64,
    /// Order `(-1, 0, +1)`.
    pub type_probs: [f64; 3],
    /// One mixture per type, indexed by [`TypeLabel::index`].
    pub mixtures: [TypedMixture; 3],
    pub mark_params: MarkParams,
    pub labels: Vec<TypeLabel>,
    /// Component index (0-based) within the mixture of the point's type.
    pub components: Vec<usize>,
}

impl ModelState {
    pub fn mixture(&self, k: TypeLabel) -> &TypedMixture {
        &self.mixtures[k.index()]
    }

    pub fn type_prob(&self, k: TypeLabel) -> f64 {
        self.type_probs[k.index()]
    }

    /// `p₁ / (p₁ + p₋₁)`.
    pub fn male_source_fraction(&self) -> f64 {
        let mf = self.type_prob(TypeLabel::MaleToFemale);
        let fm = self.type_prob(TypeLabel::FemaleToMale);
        mf / (mf + fm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::invalid("gamma must be positive"));
        }
        let total: f64 = self.type_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.type_probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::invalid("type probabilities off the simplex"));
        }
        for m in &self.mixtures {
            m.validate()?;
        }
        self.mark_params.validate()?;
        if self.labels.len() != self.components.len() {
            return Err(Error::invalid("labels and component indicators differ in length"));
        }
        for (c, &z) in self.labels.iter().zip(&self.components) {
            if z >= self.mixture(*c).truncation() {
                return Err(Error::invalid("component indicator exceeds truncation"));
            }
        }
        Ok(())
    }
}

/// `N log γ − γ − log N! + Σ_i [log p_{c_i} + log f_{c_i}(s_i) + log φ_{c_i}(x_i)]`.
///
/// Returns `-inf` when some assigned type has zero probability. Extreme
/// direction scores contribute only their linkage factor.
pub fn complete_data_log_likelihood(data: &[DataPoint], state: &ModelState) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("complete-data likelihood needs at least one point"));
    }
    if state.labels.len() != data.len() {
        return Err(Error::invalid("one label per data point is required"));
    }
    let n = data.len() as f64;
    let kernels: Vec<Vec<BvnKernel>> = state
        .mixtures
        .iter()
        .map(TypedMixture::kernels)
        .collect::<Result<_>>()?;
    let mut total = n * state.gamma.ln() - state.gamma - ln_gamma(n + 1.0);
    for (p, &c) in data.iter().zip(&state.labels) {
        let pk = state.type_prob(c);
        if pk <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let mix = state.mixture(c);
        total += pk.ln()
            + mixture_log_density(p.location, &mix.weights, &kernels[c.index()])
            + point_mark_log_density(p, c, &state.mark_params)?;
    }
    Ok(total)
}

/// Density of the standard normal at `x`.
pub(crate) fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn logit_reference_values() {
        assert_eq!(logit_transform(0.5).unwrap(), 0.0);
        assert!(close(logit_transform(0.817).unwrap(), 1.497, 1e-3));
        assert!(close(logit_transform(0.182).unwrap(), -1.502, 1e-3));
        assert!(matches!(logit_transform(0.0), Err(Error::Domain { .. })));
        assert!(matches!(logit_transform(1.0), Err(Error::Domain { .. })));
        assert!(close(expit(logit_transform(0.3).unwrap()), 0.3, 1e-15));
    }

    #[test]
    fn bvn_log_density_examples() {
        let unit = BvnComponent::new([3.0, -1.0], SymMat2::identity());
        assert!(close(bvn_log_density([3.0, -1.0], &unit).unwrap(), -(2.0 * PI).ln(), 1e-12));

        // quadratic form computed by hand: (2²/4 + 3²/9) = 2
        let comp = BvnComponent::new([10.0, 20.0], SymMat2::diag(4.0, 9.0));
        let oracle = -(2.0 * PI).ln() - 0.5 * 36f64.ln() - 0.5 * 2.0;
        let got = bvn_log_density([12.0, 23.0], &comp).unwrap();
        assert!(close(got, oracle, 1e-12));
        assert!(close(got, -4.6297, 1e-4));

        let bad = BvnComponent::new([0.0, 0.0], SymMat2::new(1.0, 2.0, 1.0));
        assert!(bvn_log_density([0.0, 0.0], &bad).is_err());
    }

    #[test]
    fn correlated_bvn_matches_inverse_quadratic_form() {
        let cov = SymMat2::new(2.0, 0.7, 1.5);
        let comp = BvnComponent::new([1.0, 2.0], cov);
        let s = [0.3, 3.1];
        let r = sub2(s, comp.mean);
        let oracle = -(2.0 * PI).ln() - 0.5 * cov.det().ln() - 0.5 * cov.inverse().unwrap().quad_form(r);
        assert!(close(bvn_log_density(s, &comp).unwrap(), oracle, 1e-12));
    }

    #[test]
    fn degenerate_and_duplicate_mixtures() {
        let c = BvnComponent::new([20.0, 25.0], SymMat2::new(9.0, 2.0, 4.0));
        let single = TypedMixture::from_sticks(vec![1.0], vec![c], 1.0).unwrap();
        let s = [22.0, 24.0];
        let direct = bvn_log_density(s, &c).unwrap().exp();
        assert!(close(type_density_eval(s, &single).unwrap(), direct, 1e-15));

        let dup = TypedMixture::from_weights(&[0.5, 0.5], vec![c, c], 1.0).unwrap();
        assert!(close(type_density_eval(s, &dup).unwrap(), direct, 1e-15));
    }

    #[test]
    fn mixture_integrates_to_one() {
        let comps = vec![
            BvnComponent::new([25.0, 20.0], SymMat2::diag(9.0, 9.0)),
            BvnComponent::new([35.0, 20.0], SymMat2::new(16.0, 6.0, 9.0)),
            BvnComponent::new([-40.0, 60.0], SymMat2::new(30.0, -10.0, 20.0)),
        ];
        let mix = TypedMixture::from_weights(&[0.6, 0.3, 0.1], comps, 1.0).unwrap();
        let kernels = mix.kernels().unwrap();
        // trapezoid rule on [-200, 200]²
        let step = 0.5;
        let n = (400.0 / step) as usize + 1;
        let mut total = 0.0;
        for i in 0..n {
            let x = -200.0 + i as f64 * step;
            let wx = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            for j in 0..n {
                let y = -200.0 + j as f64 * step;
                let wy = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                total += wx * wy * mixture_log_density([x, y], &mix.weights, &kernels).exp();
            }
        }
        total *= step * step;
        assert!(close(total, 1.0, 1e-3), "integral {total}");
    }

    #[test]
    fn mark_density_examples() {
        let mp = MarkParams {
            mu_link: 2.0,
            mu_dir_mf: 1.5,
            mu_dir_fm: -1.5,
            var_link: 1.0,
            var_dir: 1.0,
            fixed_means: false,
        };
        let base = mark_log_density([0.5, 0.5], TypeLabel::NoEvent, &mp).unwrap();
        assert!(close(base, -(2.0 * PI).ln(), 1e-12));
        assert!(close(base, -1.8379, 1e-4));

        let at_means = mark_log_density([expit(2.0), expit(1.5)], TypeLabel::MaleToFemale, &mp).unwrap();
        assert!(close(at_means, base, 1e-12));

        let shifted = mark_log_density([0.5, 0.5], TypeLabel::MaleToFemale, &mp).unwrap();
        // direct evaluation: both logits are 0, so the penalty is (2² + 1.5²)/2
        let oracle = base - (4.0 + 2.25) / 2.0;
        assert!(close(shifted, oracle, 1e-12));
        assert!(close(shifted, base - 3.125, 1e-12));
    }

    #[test]
    fn mark_log_ratio_increases_with_direction() {
        let mp = MarkParams {
            mu_link: 1.2,
            mu_dir_mf: 0.8,
            mu_dir_fm: -2.0,
            var_link: 0.7,
            var_dir: 1.3,
            fixed_means: false,
        };
        let mut prev = f64::NEG_INFINITY;
        for i in 1..200 {
            let d = i as f64 / 200.0;
            let x = [0.66, d];
            let diff = mark_log_density(x, TypeLabel::MaleToFemale, &mp).unwrap()
                - mark_log_density(x, TypeLabel::FemaleToMale, &mp).unwrap();
            assert!(diff > prev);
            prev = diff;
        }
    }

    #[test]
    fn sticks_round_trip() {
        let w = [0.5, 0.2, 0.0, 0.3];
        let v = sticks_from_weights(&w);
        assert_eq!(*v.last().unwrap(), 1.0);
        let back = weights_from_sticks(&v);
        for (a, b) in w.iter().zip(&back) {
            assert!(close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!(close(log_sum_exp(&[-1000.0, -1000.0]), -1000.0 + 2f64.ln(), 1e-12));
        assert!(close(log_sum_exp(&[0.0, -1e6]), 0.0, 1e-15));
    }

    #[test]
    fn default_hyperparams_are_valid() {
        let hp = Hyperparams::default();
        hp.validate().unwrap();
        assert_eq!(hp.a0, 1.0);
        assert_eq!(hp.b0, 0.02);
        assert_eq!(hp.sigma0, SymMat2::diag(1e4, 1e4));
    }
}
