//! Synthetic data from the typed model and the four benchmark scenarios.
//!
//! All scenarios share six bivariate normal components over
//! `(male_age, female_age)`:
//!
//! | id | mean     | covariance           | used by            |
//! |----|----------|----------------------|--------------------|
//! | A  | (25, 20) | diag(9, 9)           | f₊₁ younger men    |
//! | B  | (35, 20) | diag(9, 9)           | f₊₁ older men      |
//! | C  | (45, 20) | [[9, 3], [3, 9]]     | f₊₁ remainder      |
//! | D  | (24, 27) | [[9, 4], [4, 9]]     | f₋₁                |
//! | E  | (36, 42) | [[16, 8], [8, 16]]   | f₋₁                |
//! | F  | (33, 30) | [[36, 15], [15, 36]] | f₀                 |
//!
//! Locations falling outside the age window are redrawn, so every emitted
//! point lies inside `[15, 50)²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{bvn_with_chol, normal, sample_categorical_from_log_weights, RngStream};
use crate::error::{Error, Result};
use crate::linalg::{SymMat2, Vec2};
use crate::model::{expit, AgeDomain, BvnComponent, DataPoint, MarkParams, ModelState, TypeLabel, TypedMixture};

pub const YOUNGER_SOURCE_CENTER: Vec2 = [25.0, 20.0];
pub const OLDER_SOURCE_CENTER: Vec2 = [35.0, 20.0];

/// Mark-model truth shared by every scenario.
pub const TRUE_MARKS: MarkParams = MarkParams {
    mu_link: 2.0,
    mu_dir_mf: 1.5,
    mu_dir_fm: -1.5,
    var_link: 1.0,
    var_dir: 1.0,
    fixed_means: false,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioName {
    #[serde(rename = "MF5050")]
    Mf5050,
    #[serde(rename = "MF6040")]
    Mf6040,
    #[serde(rename = "SAME_AGE")]
    SameAge,
    #[serde(rename = "DISCORDANT_AGE")]
    DiscordantAge,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::Mf5050,
        ScenarioName::Mf6040,
        ScenarioName::SameAge,
        ScenarioName::DiscordantAge,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            ScenarioName::Mf5050 => "mf5050",
            ScenarioName::Mf6040 => "mf6040",
            ScenarioName::SameAge => "same-age",
            ScenarioName::DiscordantAge => "discordant-age",
        }
    }

    /// True `p₁ / (p₁ + p₋₁)`.
    pub fn male_source_fraction(self) -> f64 {
        let p = scenario_type_probs(self);
        p[2] / (p[0] + p[2])
    }

    /// True f₊₁ weights of the younger and older focal components.
    pub fn focal_weights(self) -> (f64, f64) {
        match self {
            ScenarioName::DiscordantAge => (0.3, 0.6),
            _ => (0.6, 0.3),
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match norm.as_str() {
            "mf5050" => Ok(ScenarioName::Mf5050),
            "mf6040" => Ok(ScenarioName::Mf6040),
            "sameage" => Ok(ScenarioName::SameAge),
            "discordantage" => Ok(ScenarioName::DiscordantAge),
            _ => Err(Error::invalid(format!(
                "unknown scenario '{s}' (expected mf5050, mf6040, same-age or discordant-age)"
            ))),
        }
    }
}

/// Parameters of the generative model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerativeParams {
    /// Order `(-1, 0, +1)`.
    pub type_probs: [f64; 3],
    pub mixtures: [TypedMixture; 3],
    pub marks: MarkParams,
    pub domain: AgeDomain,
}

impl GenerativeParams {
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.type_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.type_probs.iter().any(|&p| p < 0.0) {
            return Err(Error::invalid("type probabilities must be a probability vector"));
        }
        for m in &self.mixtures {
            m.validate()?;
        }
        self.marks.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub params: GenerativeParams,
}

/// Generated points with their hidden truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedData {
    pub points: Vec<DataPoint>,
    pub labels: Vec<TypeLabel>,
    /// Component index within the mixture of each point's type.
    pub components: Vec<usize>,
}

fn comp(mean: Vec2, xx: f64, xy: f64, yy: f64) -> BvnComponent {
    BvnComponent::new(mean, SymMat2::new(xx, xy, yy))
}

fn scenario_type_probs(name: ScenarioName) -> [f64; 3] {
    match name {
        ScenarioName::Mf5050 => [0.375, 0.25, 0.375],
        ScenarioName::Mf6040 | ScenarioName::SameAge | ScenarioName::DiscordantAge => [0.3, 0.25, 0.45],
    }
}

/// Instantiates the named scenario.
pub fn scenario(name: ScenarioName) -> Scenario {
    let a = comp(YOUNGER_SOURCE_CENTER, 9.0, 0.0, 9.0);
    let b = comp(OLDER_SOURCE_CENTER, 9.0, 0.0, 9.0);
    let c = comp([45.0, 20.0], 9.0, 3.0, 9.0);
    let d = comp([24.0, 27.0], 9.0, 4.0, 9.0);
    let e = comp([36.0, 42.0], 16.0, 8.0, 16.0);
    let f = comp([33.0, 30.0], 36.0, 15.0, 36.0);
    let (w_young, w_old) = name.focal_weights();
    let mix = |w: &[f64], comps: Vec<BvnComponent>| {
        TypedMixture::from_weights(w, comps, 1.0).expect("scenario constants are valid")
    };
    Scenario {
        name,
        params: GenerativeParams {
            type_probs: scenario_type_probs(name),
            mixtures: [
                mix(&[0.6, 0.4], vec![d, e]),
                mix(&[1.0], vec![f]),
                mix(&[w_young, w_old, 0.1], vec![a, b, c]),
            ],
            marks: TRUE_MARKS,
            domain: AgeDomain::default(),
        },
    }
}

/// Generates `n` points plus the hidden labels and component indices.
pub fn generate_from_params(truth: &GenerativeParams, n: usize, rng: &mut RngStream) -> Result<SimulatedData> {
    truth.validate()?;
    if n == 0 {
        return Err(Error::invalid("need at least one point"));
    }
    let log_p = truth.type_probs.map(f64::ln);
    let log_w: Vec<Vec<f64>> = truth
        .mixtures
        .iter()
        .map(|m| m.weights.iter().map(|w| w.ln()).collect())
        .collect();
    let chols: Vec<Vec<_>> = truth
        .mixtures
        .iter()
        .map(|m| m.components.iter().map(|c| c.cov.cholesky()).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut out = SimulatedData {
        points: Vec::with_capacity(n),
        labels: Vec::with_capacity(n),
        components: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let c = TypeLabel::from_index(sample_categorical_from_log_weights(&log_p, rng)?);
        let h = sample_categorical_from_log_weights(&log_w[c.index()], rng)?;
        let comp = &truth.mixtures[c.index()].components[h];
        let chol = &chols[c.index()][h];
        let mut tries = 0;
        let s = loop {
            let s = bvn_with_chol(rng, comp.mean, chol);
            if truth.domain.contains_point(s) {
                break s;
            }
            tries += 1;
            if tries > 100_000 {
                return Err(Error::invalid("component has negligible mass inside the age window"));
            }
        };
        let (link, dir) = draw_marks(c, &truth.marks, rng);
        out.points.push(DataPoint::new(s[0], s[1], link, dir));
        out.labels.push(c);
        out.components.push(h);
    }
    Ok(out)
}

fn draw_marks(c: TypeLabel, mp: &MarkParams, rng: &mut RngStream) -> (f64, f64) {
    let link = expit(normal(rng, mp.link_mean(c), mp.var_link));
    let dir = expit(normal(rng, mp.dir_mean(c), mp.var_dir));
    (link, dir)
}

/// Instantiates the named scenario and generates `n` points from it.
pub fn generate_scenario(name: ScenarioName, n: usize, rng: &mut RngStream) -> Result<(SimulatedData, Scenario)> {
    let sc = scenario(name);
    let data = generate_from_params(&sc.params, n, rng)?;
    Ok((data, sc))
}

/// Redraws locations and marks given the latent labels and component
/// indicators of `state`, with no age-window restriction.
pub fn generate_given_latents(state: &ModelState, rng: &mut RngStream) -> Result<Vec<DataPoint>> {
    state
        .labels
        .iter()
        .zip(&state.components)
        .map(|(&c, &h)| {
            let comp = &state.mixture(c).components[h];
            let chol = comp.cov.cholesky()?;
            let s = bvn_with_chol(rng, comp.mean, &chol);
            let (link, dir) = draw_marks(c, &state.mark_params, rng);
            Ok(DataPoint::new(s[0], s[1], link, dir))
        })
        .collect()
}
