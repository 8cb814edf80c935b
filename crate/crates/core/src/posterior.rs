//! Posterior summaries: type proportions, source-age densities and HDIs,
//! band-conditional source densities, flow-surface grids with highest
//! probability regions, classification entropy and trace diagnostics.
//!
//! Every density is renormalized to unit mass inside the age window; the
//! fitted BVN components leak some mass outside it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::diagnostics::{effective_sample_size, split_rhat};
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::model::{std_normal_pdf, AgeDomain, BvnComponent, ModelState, TypeLabel, TypedMixture};
use crate::sampler::PosteriorSamples;

/// Default resolution of 1-D age grids, in years.
pub const DEFAULT_STEP_1D: f64 = 0.1;
/// Default resolution of 2-D surface grids, in years.
pub const DEFAULT_STEP_2D: f64 = 0.25;
/// Target masses of the highest probability regions.
pub const HPR_MASSES: [f64; 3] = [0.5, 0.8, 0.9];
/// Components lighter than this are skipped when evaluating surfaces.
const NEGLIGIBLE_WEIGHT: f64 = 1e-14;

/// Ages `min, min + Δ, …` strictly below `max`.
pub fn age_grid(domain: AgeDomain, step: f64) -> Vec<f64> {
    let n = ((domain.width() / step) - 1e-9).ceil() as usize;
    (0..n).map(|i| domain.min + i as f64 * step).collect()
}

/// Density values on an evenly spaced age grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid1D {
    pub ages: Vec<f64>,
    pub values: Vec<f64>,
    pub step: f64,
}

impl DensityGrid1D {
    pub fn new(ages: Vec<f64>, values: Vec<f64>, step: f64) -> Self {
        Self { ages, values, step }
    }

    /// Trapezoid integral over the grid nodes.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.step)
    }

    /// Rescales to unit trapezoid mass. A zero curve is left unchanged.
    pub fn normalize(&mut self) {
        let total = self.integral();
        if total > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= total);
        }
    }
}

fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let sd = var.sqrt();
    std_normal_pdf((x - mean) / sd) / sd
}

fn normal_cdf(x: f64, mean: f64, var: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-(x - mean) / (2.0 * var).sqrt())
}

fn source_axis(k: TypeLabel) -> Result<usize> {
    k.source_axis()
        .ok_or_else(|| Error::invalid("source-age summaries need a transmission type (-1 or +1)"))
}

/// Marginal density of the source age under `f_k` (male age for `+1`,
/// female age for `-1`), renormalized to unit in-window mass.
pub fn source_age_marginal_density(mix: &TypedMixture, k: TypeLabel, ages: &[f64], step: f64) -> Result<DensityGrid1D> {
    let axis = source_axis(k)?;
    let values = ages
        .iter()
        .map(|&a| {
            mix.weights
                .iter()
                .zip(&mix.components)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, c)| w * normal_pdf(a, c.mean[axis], axis_var(c, axis)))
                .sum()
        })
        .collect();
    let mut grid = DensityGrid1D::new(ages.to_vec(), values, step);
    grid.normalize();
    Ok(grid)
}

fn axis_var(c: &BvnComponent, axis: usize) -> f64 {
    if axis == 0 {
        c.cov.xx
    } else {
        c.cov.yy
    }
}

/// Pointwise mean over kept draws of the per-draw normalized marginal.
pub fn posterior_source_age_density(ps: &PosteriorSamples, k: TypeLabel, ages: &[f64], step: f64) -> Result<DensityGrid1D> {
    mean_curve(ps, ages, step, |s| source_age_marginal_density(s.mixture(k), k, ages, step))
}

fn mean_curve(
    ps: &PosteriorSamples,
    ages: &[f64],
    step: f64,
    curve: impl Fn(&ModelState) -> Result<DensityGrid1D> + Sync,
) -> Result<DensityGrid1D> {
    if ps.is_empty() {
        return Err(Error::invalid("no posterior draws"));
    }
    let curves: Vec<DensityGrid1D> = ps.draws.par_iter().map(&curve).collect::<Result<_>>()?;
    let mut values = vec![0.0; ages.len()];
    for c in &curves {
        for (v, x) in values.iter_mut().zip(&c.values) {
            *v += x;
        }
    }
    let n = curves.len() as f64;
    values.iter_mut().for_each(|v| *v /= n);
    let mut grid = DensityGrid1D::new(ages.to_vec(), values, step);
    grid.normalize();
    Ok(grid)
}

/// A closed age interval `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgeInterval {
    pub lower: f64,
    pub upper: f64,
}

impl AgeInterval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Highest density region of a gridded density as a union of intervals.
///
/// Each node stands for the cell `[a − Δ/2, a + Δ/2)`. Cells are taken in
/// decreasing density, lower age first among equal densities, until their
/// share of the total mass reaches `mass`; adjacent cells are merged.
pub fn hdi_from_grid(dg: &DensityGrid1D, mass: f64) -> Result<Vec<AgeInterval>> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::invalid(format!("HDI mass must lie in (0, 1), got {mass}")));
    }
    let total: f64 = dg.values.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("density grid has no mass"));
    }
    let mut order: Vec<usize> = (0..dg.values.len()).collect();
    order.sort_by(|&a, &b| dg.values[b].total_cmp(&dg.values[a]).then(a.cmp(&b)));
    let mut keep = vec![false; dg.values.len()];
    let mut acc = 0.0;
    for i in order {
        keep[i] = true;
        acc += dg.values[i] / total;
        if acc >= mass - 1e-12 {
            break;
        }
    }
    let half = 0.5 * dg.step;
    let mut out = Vec::new();
    let mut start = None;
    for (i, &k) in keep.iter().enumerate() {
        match (k, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(AgeInterval {
                    lower: dg.ages[s] - half,
                    upper: dg.ages[i - 1] + half,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(AgeInterval {
            lower: dg.ages[s] - half,
            upper: dg.ages[dg.ages.len() - 1] + half,
        });
    }
    Ok(out)
}

/// HDIs of every kept draw's source-age marginal.
pub fn per_draw_hdis(ps: &PosteriorSamples, k: TypeLabel, ages: &[f64], step: f64, mass: f64) -> Result<Vec<Vec<AgeInterval>>> {
    ps.draws
        .par_iter()
        .map(|s| hdi_from_grid(&source_age_marginal_density(s.mixture(k), k, ages, step)?, mass))
        .collect()
}

// 8-point Gauss–Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];
/// Integration panels are at most this many recipient standard deviations wide.
const PANEL_SDS: f64 = 0.5;
/// The recipient integral is clipped to this many standard deviations.
const CLIP_SDS: f64 = 12.0;

/// Unnormalized `∫_band N₂((x, y); θ, Σ) dy` evaluated at each source age `x`,
/// with composite 8-point Gauss–Legendre panels over the recipient age.
fn band_source_density(c: &BvnComponent, src: usize, lo: f64, hi: f64, ages: &[f64]) -> Vec<f64> {
    let rcp = 1 - src;
    let (mx, my) = (c.mean[src], c.mean[rcp]);
    let (vx, vy) = (axis_var(c, src), axis_var(c, rcp));
    let sy = vy.sqrt();
    let a = lo.max(my - CLIP_SDS * sy);
    let b = hi.min(my + CLIP_SDS * sy);
    if !(a < b) {
        return vec![0.0; ages.len()];
    }
    // conditional x | y ~ N(mx + β (y − my), vx − β cov)
    let beta = c.cov.xy / vy;
    let cond_var = vx - beta * c.cov.xy;
    let panels = ((b - a) / (PANEL_SDS * sy)).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 8);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            for s in [-1.0, 1.0] {
                let y = mid + s * t * 0.5 * width;
                nodes.push((y, w * 0.5 * width * normal_pdf(y, my, vy)));
            }
        }
    }
    ages.iter()
        .map(|&x| {
            nodes
                .iter()
                .map(|&(y, w)| w * normal_pdf(x, mx + beta * (y - my), cond_var))
                .sum()
        })
        .collect()
}

/// Probability that the recipient age of one component falls in `[lo, hi)`.
pub fn component_band_mass(c: &BvnComponent, k: TypeLabel, lo: f64, hi: f64) -> Result<f64> {
    let rcp = 1 - source_axis(k)?;
    let (m, v) = (c.mean[rcp], axis_var(c, rcp));
    Ok((normal_cdf(hi, m, v) - normal_cdf(lo, m, v)).max(0.0))
}

/// Mixture probability of a recipient age in `[lo, hi)`.
pub fn mixture_band_mass(mix: &TypedMixture, k: TypeLabel, lo: f64, hi: f64) -> Result<f64> {
    mix.weights
        .iter()
        .zip(&mix.components)
        .map(|(w, c)| Ok(w * component_band_mass(c, k, lo, hi)?))
        .sum()
}

/// Source-age density given that the recipient age lies in `[lo, hi)`.
///
/// Bounds may be infinite. Each component contributes its weight times the
/// band integral of its joint density, so heavier band mass means more say;
/// the sum is renormalized in-window. Integration uses composite 8-point
/// Gauss–Legendre with panels at most half a recipient sd wide.
pub fn conditional_source_density(
    mix: &TypedMixture,
    k: TypeLabel,
    band: (f64, f64),
    ages: &[f64],
    step: f64,
) -> Result<DensityGrid1D> {
    let src = source_axis(k)?;
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty recipient band [{lo}, {hi})")));
    }
    if !(mixture_band_mass(mix, k, lo, hi)? > 0.0) {
        return Err(Error::invalid(format!("recipient band [{lo}, {hi}) has zero probability")));
    }
    let mut values = vec![0.0; ages.len()];
    for (w, c) in mix.weights.iter().zip(&mix.components) {
        if *w <= NEGLIGIBLE_WEIGHT {
            continue;
        }
        for (v, d) in values.iter_mut().zip(band_source_density(c, src, lo, hi, ages)) {
            *v += w * d;
        }
    }
    let mut grid = DensityGrid1D::new(ages.to_vec(), values, step);
    if !(grid.integral() > 0.0) {
        return Err(Error::invalid(format!("recipient band [{lo}, {hi}) has no in-window source mass")));
    }
    grid.normalize();
    Ok(grid)
}

/// Posterior band-conditional curves for a set of recipient bands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub bands: Vec<(f64, f64)>,
    /// Posterior mean recipient mass of each band.
    pub band_masses: Vec<f64>,
    /// One normalized curve per band, averaged over the draws that put
    /// positive mass in the band. All zero if no draw does.
    pub curves: Vec<DensityGrid1D>,
    pub draws_used: Vec<usize>,
}

impl BandTable {
    /// Curve of band `b` scaled by its band mass, for stacked plots.
    pub fn stacked(&self, b: usize) -> Vec<f64> {
        self.curves[b].values.iter().map(|v| v * self.band_masses[b]).collect()
    }
}

/// Consecutive recipient bands of `width` years covering `[start, end)`.
pub fn recipient_bands(start: f64, end: f64, width: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|i| start + i as f64 * width)
        .take_while(|&lo| lo < end)
        .map(|lo| (lo, (lo + width).min(end)))
        .collect()
}

pub fn posterior_band_table(
    ps: &PosteriorSamples,
    k: TypeLabel,
    bands: &[(f64, f64)],
    ages: &[f64],
    step: f64,
) -> Result<BandTable> {
    if ps.is_empty() {
        return Err(Error::invalid("no posterior draws"));
    }
    source_axis(k)?;
    let mut band_masses = Vec::with_capacity(bands.len());
    let mut curves = Vec::with_capacity(bands.len());
    let mut draws_used = Vec::with_capacity(bands.len());
    for &band in bands {
        let masses: Vec<f64> = ps
            .draws
            .iter()
            .map(|s| mixture_band_mass(s.mixture(k), k, band.0, band.1))
            .collect::<Result<_>>()?;
        band_masses.push(masses.iter().sum::<f64>() / masses.len() as f64);
        // A draw with no mass in the band has no conditional; it is left out.
        let per_draw: Vec<DensityGrid1D> = ps
            .draws
            .par_iter()
            .filter_map(|s| conditional_source_density(s.mixture(k), k, band, ages, step).ok())
            .collect();
        let mut values = vec![0.0; ages.len()];
        for c in &per_draw {
            for (v, x) in values.iter_mut().zip(&c.values) {
                *v += x;
            }
        }
        let mut grid = DensityGrid1D::new(ages.to_vec(), values, step);
        grid.normalize();
        draws_used.push(per_draw.len());
        curves.push(grid);
    }
    Ok(BandTable {
        bands: bands.to_vec(),
        band_masses,
        curves,
        draws_used,
    })
}

/// Cell-centered density surface over the age square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid2D {
    /// Cell centers along either axis.
    pub centers: Vec<f64>,
    pub step: f64,
    /// Row-major values, `values[i * n + j]` at male age `centers[i]`, female age `centers[j]`.
    pub values: Vec<f64>,
    /// Density thresholds of the regions in [`HPR_MASSES`].
    pub hpr_levels: [f64; 3],
}

impl SurfaceGrid2D {
    pub fn size(&self) -> usize {
        self.centers.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step * self.step
    }

    /// Cells inside the highest probability region of `HPR_MASSES[level]`.
    pub fn region(&self, level: usize) -> Vec<bool> {
        let t = self.hpr_levels[level];
        self.values.iter().map(|&v| v >= t).collect()
    }

    /// Area in square years of that region.
    pub fn region_area(&self, level: usize) -> f64 {
        self.region(level).iter().filter(|&&r| r).count() as f64 * self.step * self.step
    }
}

/// Density thresholds such that cells at or above each one hold at least
/// the target masses.
pub fn hpr_thresholds(values: &[f64], cell_area: f64) -> [f64; 3] {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum::<f64>() * cell_area;
    let mut out = [0.0; 3];
    let mut acc = 0.0;
    let mut level = 0;
    for v in sorted {
        acc += v * cell_area / total;
        while level < 3 && acc >= HPR_MASSES[level] - 1e-12 {
            out[level] = v;
            level += 1;
        }
        if level == 3 {
            break;
        }
    }
    out
}

fn cell_centers(domain: AgeDomain, step: f64) -> Vec<f64> {
    let n = ((domain.width() / step) - 1e-9).ceil() as usize;
    (0..n).map(|i| domain.min + (i as f64 + 0.5) * step).collect()
}

fn surface_from_values(centers: Vec<f64>, step: f64, mut values: Vec<f64>) -> SurfaceGrid2D {
    let mass = values.iter().sum::<f64>() * step * step;
    if mass > 0.0 {
        values.iter_mut().for_each(|v| *v /= mass);
    }
    let hpr_levels = hpr_thresholds(&values, step * step);
    SurfaceGrid2D {
        centers,
        step,
        values,
        hpr_levels,
    }
}

/// `f_k` of a single mixture on the grid, renormalized in-window.
pub fn mixture_surface(mix: &TypedMixture, domain: AgeDomain, step: f64) -> Result<SurfaceGrid2D> {
    let centers = cell_centers(domain, step);
    let active = active_kernels(mix)?;
    let mut values = Vec::with_capacity(centers.len() * centers.len());
    for &x in &centers {
        for &y in &centers {
            values.push(eval_active(&active, [x, y]));
        }
    }
    Ok(surface_from_values(centers, step, values))
}

fn active_kernels(mix: &TypedMixture) -> Result<Vec<(f64, crate::model::BvnKernel)>> {
    mix.weights
        .iter()
        .zip(&mix.components)
        .filter(|(w, _)| **w > NEGLIGIBLE_WEIGHT)
        .map(|(w, c)| Ok((*w, c.kernel()?)))
        .collect()
}

#[inline]
fn eval_active(active: &[(f64, crate::model::BvnKernel)], s: Vec2) -> f64 {
    active.iter().map(|(w, k)| w * k.log_density(s).exp()).sum()
}

/// Pointwise posterior median of `f_k` over all kept draws, renormalized
/// in-window, with its 50/80/90% highest probability regions.
pub fn flow_surface_grid(ps: &PosteriorSamples, k: TypeLabel, domain: AgeDomain, step: f64) -> Result<SurfaceGrid2D> {
    source_axis(k)?;
    if ps.is_empty() {
        return Err(Error::invalid("no posterior draws"));
    }
    let centers = cell_centers(domain, step);
    let n = centers.len();
    let actives: Vec<_> = ps
        .draws
        .iter()
        .map(|s| active_kernels(s.mixture(k)))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = centers
        .par_iter()
        .map(|&x| {
            let mut block = vec![0.0; actives.len() * n];
            for (d, active) in actives.iter().enumerate() {
                for (j, &y) in centers.iter().enumerate() {
                    block[j * actives.len() + d] = eval_active(active, [x, y]);
                }
            }
            block.chunks_mut(actives.len()).map(median_in_place).collect()
        })
        .collect();
    Ok(surface_from_values(centers, step, rows.concat()))
}

fn median_in_place(xs: &mut [f64]) -> f64 {
    let n = xs.len();
    let mid = n / 2;
    let (_, &mut upper, _) = xs.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = xs[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Linear-interpolation sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Posterior mean with an equal-tailed 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl CredibleInterval {
    pub fn from_draws(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::invalid("no draws to summarize"));
        }
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            lower: quantile_sorted(&sorted, 0.025),
            upper: quantile_sorted(&sorted, 0.975),
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mean: self.mean * s,
            lower: self.lower * s,
            upper: self.upper * s,
        }
    }

    /// `46.3% (39.4%, 53.1%)`
    pub fn format_percent(&self) -> String {
        format!(
            "{:.1}% ({:.1}%, {:.1}%)",
            100.0 * self.mean,
            100.0 * self.lower,
            100.0 * self.upper
        )
    }

    /// `244 (207, 279)`
    pub fn format_count(&self) -> String {
        format!(
            "{} ({}, {})",
            self.mean.round() as i64,
            self.lower.round() as i64,
            self.upper.round() as i64
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeProportionRow {
    pub label: TypeLabel,
    pub proportion: CredibleInterval,
    /// `proportion` scaled by the number of points.
    pub count: CredibleInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeProportionSummary {
    pub n: usize,
    /// Order `(-1, 0, +1)`.
    pub rows: Vec<TypeProportionRow>,
    /// `p₊₁ / (p₊₁ + p₋₁)`.
    pub male_source_fraction: CredibleInterval,
}

pub fn type_proportion_summary(ps: &PosteriorSamples, n: usize) -> Result<TypeProportionSummary> {
    if ps.is_empty() {
        return Err(Error::invalid("no posterior draws"));
    }
    let rows = TypeLabel::ALL
        .iter()
        .map(|&k| {
            let p: Vec<f64> = ps.draws.iter().map(|s| s.type_prob(k)).collect();
            let proportion = CredibleInterval::from_draws(&p)?;
            Ok(TypeProportionRow {
                label: k,
                proportion,
                count: proportion.scaled(n as f64),
            })
        })
        .collect::<Result<_>>()?;
    Ok(TypeProportionSummary {
        n,
        rows,
        male_source_fraction: CredibleInterval::from_draws(&ps.male_source_fraction())?,
    })
}

/// Probability that one component falls in the rectangle
/// `[x0, x1) × [y0, y1)`: Gauss–Legendre over the male axis, exact normal
/// CDF for the female age given the male age.
pub fn component_box_mass(c: &BvnComponent, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> f64 {
    let (mx, my) = (c.mean[0], c.mean[1]);
    let (vx, vy) = (c.cov.xx, c.cov.yy);
    let sx = vx.sqrt();
    let a = x0.max(mx - CLIP_SDS * sx);
    let b = x1.min(mx + CLIP_SDS * sx);
    if !(a < b) {
        return 0.0;
    }
    let beta = c.cov.xy / vx;
    let cond_var = (vy - beta * c.cov.xy).max(0.0);
    let panels = ((b - a) / (PANEL_SDS * sx)).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            for s in [-1.0, 1.0] {
                let x = mid + s * t * 0.5 * width;
                let m = my + beta * (x - mx);
                let inner = normal_cdf(y1, m, cond_var) - normal_cdf(y0, m, cond_var);
                total += w * 0.5 * width * normal_pdf(x, mx, vx) * inner;
            }
        }
    }
    total.clamp(0.0, 1.0)
}

/// Shares of male source ages among `f₊₁` transmissions whose female
/// recipient age lies in `band`. Entry `i` covers male ages
/// `[edges[i], edges[i + 1])`; the outer edges may be infinite.
pub fn band_source_shares(mix: &TypedMixture, band: (f64, f64), edges: &[f64]) -> Result<Vec<f64>> {
    let total = mixture_band_mass(mix, TypeLabel::MaleToFemale, band.0, band.1)?;
    if !(total > 0.0) {
        return Err(Error::InvalidInput(format!("no mass in recipient band [{}, {})", band.0, band.1)));
    }
    Ok(edges
        .windows(2)
        .map(|e| {
            mix.weights
                .iter()
                .zip(&mix.components)
                .filter(|(w, _)| **w > NEGLIGIBLE_WEIGHT)
                .map(|(w, c)| w * component_box_mass(c, (e[0], e[1]), band))
                .sum::<f64>()
                / total
        })
        .collect())
}

/// Classification entropy of one point's assignment frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySummary {
    pub entropy: f64,
    /// Most frequent type; the earliest of `(-1, 0, +1)` on ties.
    pub modal: TypeLabel,
    /// Entropy above 0.8.
    pub flexible: bool,
}

/// Threshold above which a point is reported as flexible-type.
pub const FLEXIBLE_ENTROPY: f64 = 0.8;

pub fn classification_entropy(phat: &[f64; 3]) -> EntropySummary {
    let entropy = phat
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0);
    let mut modal = 0;
    for k in 1..3 {
        if phat[k] > phat[modal] {
            modal = k;
        }
    }
    EntropySummary {
        entropy,
        modal: TypeLabel::from_index(modal),
        flexible: entropy > FLEXIBLE_ENTROPY,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub mean: f64,
    pub sd: f64,
    pub ess: f64,
    /// The trace is constant; `ess` is then its length.
    pub degenerate: bool,
    /// Split-chain R̂, present when two or more chains are summarized.
    pub rhat: Option<f64>,
}

const MIN_TRACE_LEN: usize = 10;

pub fn summarize_trace(trace: &[f64]) -> Result<TraceSummary> {
    summarize_chains(&[trace.to_vec()])
}

/// Pools several chains of one quantity. ESS is summed over chains.
pub fn summarize_chains(chains: &[Vec<f64>]) -> Result<TraceSummary> {
    if chains.is_empty() || chains.iter().any(|c| c.len() < MIN_TRACE_LEN) {
        return Err(Error::invalid(format!("traces need at least {MIN_TRACE_LEN} values")));
    }
    if chains.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("trace contains non-finite values"));
    }
    let all: Vec<f64> = chains.concat();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let sd = (all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let per_chain: Vec<Option<f64>> = chains.iter().map(|c| effective_sample_size(c)).collect();
    let degenerate = per_chain.iter().all(Option::is_none);
    let ess = chains
        .iter()
        .zip(&per_chain)
        .map(|(c, e)| e.unwrap_or(c.len() as f64))
        .sum();
    let rhat = if chains.len() >= 2 && !degenerate {
        split_rhat(chains)
    } else {
        None
    };
    Ok(TraceSummary {
        mean,
        sd,
        ess,
        degenerate,
        rhat,
    })
}
