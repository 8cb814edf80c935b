//! Random-variate primitives driven by a seedable, stream-splittable generator.
//!
//! Every draw in the crate goes through [`RngStream`], a ChaCha8 generator
//! keyed by `(seed, stream_id)`. ChaCha's stream parameter gives independent
//! sequences per stream id without serial coupling, so replicates and
//! sub-tasks never share state.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{Chol2, SymMat2, Vec2};

/// Deterministic random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on the open interval (0, 1).
    pub fn open_unit(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer; derives well-spread seeds from small integers.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn standard_normal(rng: &mut RngStream) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normal(rng: &mut RngStream, mean: f64, var: f64) -> f64 {
    mean + var.sqrt() * standard_normal(rng)
}

/// Gamma with shape–rate parameterization.
pub fn gamma(rng: &mut RngStream, shape: f64, rate: f64) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("gamma parameters must be positive")
        .sample(rng)
}

pub fn beta(rng: &mut RngStream, a: f64, b: f64) -> f64 {
    Beta::new(a, b).expect("beta parameters must be positive").sample(rng)
}

/// inverse-Gamma(shape, scale): the reciprocal of a Gamma(shape, rate = scale) draw.
pub fn inverse_gamma(rng: &mut RngStream, shape: f64, scale: f64) -> f64 {
    1.0 / gamma(rng, shape, scale)
}

pub fn dirichlet3(rng: &mut RngStream, conc: [f64; 3]) -> [f64; 3] {
    let g = conc.map(|a| gamma(rng, a, 1.0));
    let total: f64 = g.iter().sum();
    if total > 0.0 {
        let mut p = g.map(|x| x / total);
        // close the simplex exactly
        p[1] = 1.0 - p[0] - p[2];
        if p[1] < 0.0 {
            p[1] = 0.0;
            let s = p[0] + p[2];
            p[0] /= s;
            p[2] = 1.0 - p[0];
        }
        p
    } else {
        // every gamma underflowed: all mass on one vertex, chosen by concentration
        let idx = sample_categorical_from_log_weights(&conc.map(f64::ln), rng)
            .expect("concentrations are positive");
        let mut p = [0.0; 3];
        p[idx] = 1.0;
        p
    }
}

/// Bivariate normal draw via the Cholesky factor of `cov`.
pub fn bvn(rng: &mut RngStream, mean: Vec2, cov: &SymMat2) -> Result<Vec2> {
    let chol = cov.cholesky()?;
    Ok(bvn_with_chol(rng, mean, &chol))
}

pub(crate) fn bvn_with_chol(rng: &mut RngStream, mean: Vec2, chol: &Chol2) -> Vec2 {
    let z = [standard_normal(rng), standard_normal(rng)];
    let x = chol.mul_lower(z);
    [mean[0] + x[0], mean[1] + x[1]]
}

/// Which half-line a truncated normal lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfLine {
    Positive,
    Negative,
}

/// Standard normal conditioned on `Z > a`.
fn std_normal_above(a: f64, rng: &mut RngStream) -> f64 {
    if a < 25.0 {
        // inverse CDF on the upper tail: Q(Z) = u Q(a), Q(z) = erfc(z/√2)/2
        let tail = erfc(a / SQRT_2);
        loop {
            let z = SQRT_2 * erfc_inv(rng.open_unit() * tail);
            if z > a && z.is_finite() {
                return z;
            }
        }
    } else {
        // exponential proposal for the far tail
        let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
        loop {
            let z = a - rng.open_unit().ln() / lambda;
            let accept = (-0.5 * (z - lambda) * (z - lambda)).exp();
            if rng.open_unit() <= accept {
                return z;
            }
        }
    }
}

/// Draw from `N(mu, var)` conditioned to `(0, ∞)` or `(-∞, 0)`.
pub fn sample_half_line_truncated_normal(mu: f64, var: f64, side: HalfLine, rng: &mut RngStream) -> f64 {
    assert!(var > 0.0, "truncated normal variance must be positive");
    let sd = var.sqrt();
    // reduce the negative side to the positive one by reflection
    let m = match side {
        HalfLine::Positive => mu,
        HalfLine::Negative => -mu,
    };
    let a = -m / sd;
    let x = loop {
        let x = m + sd * std_normal_above(a, rng);
        if x > 0.0 {
            break x;
        }
    };
    match side {
        HalfLine::Positive => x,
        HalfLine::Negative => -x,
    }
}

/// CDF of the half-line truncated normal, used by goodness-of-fit checks.
pub fn half_line_truncated_normal_cdf(x: f64, mu: f64, var: f64, side: HalfLine) -> f64 {
    let sd = var.sqrt();
    match side {
        HalfLine::Positive => {
            if x <= 0.0 {
                return 0.0;
            }
            let qa = erfc(-mu / sd / SQRT_2);
            let qx = erfc((x - mu) / sd / SQRT_2);
            1.0 - qx / qa
        }
        HalfLine::Negative => 1.0 - half_line_truncated_normal_cdf(-x, -mu, var, HalfLine::Positive),
    }
}

/// Inverse-Wishart draw for 2×2 matrices with `E[Σ] = scale / (dof − 3)` when `dof > 3`.
///
/// Uses the Bartlett decomposition of the Wishart precision `Σ⁻¹ ~ W(dof, scale⁻¹)`.
pub fn sample_inverse_wishart(dof: f64, scale: &SymMat2, rng: &mut RngStream) -> Result<SymMat2> {
    if !(dof > 1.0) {
        return Err(Error::invalid(format!("inverse-Wishart dof must exceed 1, got {dof}")));
    }
    let prec_chol = scale.inverse()?.cholesky()?;
    loop {
        let c1 = (2.0 * gamma(rng, 0.5 * dof, 1.0)).sqrt();
        let c2 = (2.0 * gamma(rng, 0.5 * (dof - 1.0), 1.0)).sqrt();
        let off = standard_normal(rng);
        // B = L A, both lower triangular
        let b = Chol2 {
            l11: prec_chol.l11 * c1,
            l21: prec_chol.l21 * c1 + prec_chol.l22 * off,
            l22: prec_chol.l22 * c2,
        };
        if let Ok(sigma) = b.product().inverse() {
            if sigma.is_spd() && sigma.is_finite() {
                return Ok(sigma);
            }
        }
    }
}

/// Index `h` with probability `exp(log_w[h]) / Σ exp(log_w)`.
pub fn sample_categorical_from_log_weights(log_w: &[f64], rng: &mut RngStream) -> Result<usize> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > f64::NEG_INFINITY) || max.is_nan() {
        return Err(Error::DegenerateWeights);
    }
    let total: f64 = log_w.iter().map(|&l| (l - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (h, &l) in log_w.iter().enumerate() {
        let w = (l - max).exp();
        if w > 0.0 {
            last_positive = h;
            if u < w {
                return Ok(h);
            }
            u -= w;
        }
    }
    Ok(last_positive)
}
