//! Typed marked spatial Poisson process model for transmission flows.
//!
//! Points are pairs of ages with a two-score mark. Each point carries a
//! latent type (female-to-male, none, male-to-female); each type owns a
//! truncated Dirichlet-process mixture of bivariate normals over the age
//! plane, and the marks follow type-dependent logit-normal laws. The
//! [`sampler`] module implements the data-augmented Gibbs sampler,
//! [`simulate`] the synthetic scenarios, [`posterior`] the summaries, and
//! [`io`] plus [`cli`] the file and command-line surface.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod model;
pub mod posterior;
pub mod report;
pub mod sampler;
pub mod simulate;

pub use error::{Error, Result};
pub use linalg::{SymMat2, Vec2};
pub use model::{
    AgeDomain, BvnComponent, DataPoint, Hyperparams, MarkParams, ModelState, TypeLabel, TypedMixture,
};
pub use sampler::{run_mcmc, run_mcmc_fixed_types, McmcConfig, PosteriorSamples, Sampler};
