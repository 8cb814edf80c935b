//! Output directories of the `summarize` and `replicate` commands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{replicates_csv_bytes, summarize_replicates, ExperimentSummary, ReplicateConfig, ReplicateResult};
use crate::io::{csv_bytes, fnum, sha256_hex, write_atomic, write_json, PosteriorRun, MANIFEST_FILE, SUMMARY_FILE};
use crate::model::TypeLabel;
use crate::posterior::{
    age_grid, flow_surface_grid, hdi_from_grid, per_draw_hdis, posterior_band_table, posterior_source_age_density,
    recipient_bands, type_proportion_summary, AgeInterval, BandTable, SurfaceGrid2D, DEFAULT_STEP_1D, DEFAULT_STEP_2D,
};
use crate::sampler::type_tag;

pub const PROPORTIONS_FILE: &str = "type_proportions.csv";
pub const HDI_FILE: &str = "hdi.csv";
pub const REPLICATES_FILE: &str = "replicates.csv";

pub fn density_file(k: TypeLabel) -> String {
    format!("source_age_density_{}.csv", type_tag(k))
}

pub fn bands_file(k: TypeLabel) -> String {
    format!("band_conditional_{}.csv", type_tag(k))
}

pub fn surface_file(k: TypeLabel) -> String {
    format!("flow_surface_{}.csv", type_tag(k))
}

/// The two transmission types, in output order.
const DIRECTIONS: [TypeLabel; 2] = [TypeLabel::MaleToFemale, TypeLabel::FemaleToMale];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummarizeOptions {
    pub hdi_mass: f64,
    /// Width in years of the recipient age bands.
    pub band_width: f64,
}

impl Default for SummarizeOptions {
    fn default() -> Self {
        Self {
            hdi_mass: 0.5,
            band_width: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSummary {
    pub label: TypeLabel,
    /// HDI of the posterior mean source-age density.
    pub hdi: Vec<AgeInterval>,
    /// Posterior medians of the per-draw HDI bounds (outermost interval).
    pub hdi_lower_median: f64,
    pub hdi_upper_median: f64,
    pub band_masses: Vec<((f64, f64), f64)>,
    /// Draws with positive mass in each band, which its curve averages over.
    pub band_draws_used: Vec<usize>,
    /// Density thresholds of the 50/80/90% regions of the median surface.
    pub hpr_levels: [f64; 3],
    pub hpr_areas: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub options: SummarizeOptions,
    pub posterior_config_hash: String,
    pub n_points: usize,
    pub kept_samples: usize,
    pub table: Vec<(String, String, String)>,
    pub male_source_fraction: String,
    pub directions: Vec<DirectionSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportManifest {
    pub software: String,
    pub version: String,
    pub input_manifest_sha256: Option<String>,
    pub seed: u64,
    pub files: Vec<(String, String)>,
}

fn format_intervals(iv: &[AgeInterval]) -> String {
    iv.iter()
        .map(|i| format!("[{:.1}, {:.1}]", i.lower, i.upper))
        .collect::<Vec<_>>()
        .join(" ∪ ")
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    crate::posterior::quantile_sorted(&xs, 0.5)
}

fn band_label((lo, hi): (f64, f64)) -> String {
    format!("{lo}_{hi}")
}

fn bands_bytes(t: &BandTable) -> Vec<u8> {
    let mut header = vec!["age".to_string()];
    header.extend(t.bands.iter().map(|&b| format!("band_{}", band_label(b))));
    header.extend(t.bands.iter().map(|&b| format!("stacked_{}", band_label(b))));
    let stacked: Vec<Vec<f64>> = (0..t.bands.len()).map(|b| t.stacked(b)).collect();
    let ages = &t.curves.first().map(|c| c.ages.clone()).unwrap_or_default();
    csv_bytes(
        &header,
        ages.iter().enumerate().map(|(i, a)| {
            let mut row = vec![fnum(*a)];
            row.extend(t.curves.iter().map(|c| fnum(c.values[i])));
            row.extend(stacked.iter().map(|s| fnum(s[i])));
            row
        }),
    )
}

fn surface_bytes(s: &SurfaceGrid2D) -> Vec<u8> {
    let header: Vec<String> = ["male_age", "female_age", "density", "in_hpr50", "in_hpr80", "in_hpr90"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    let n = s.size();
    csv_bytes(
        &header,
        (0..n * n).map(|c| {
            let (i, j) = (c / n, c % n);
            let v = s.values[c];
            let mut row = vec![fnum(s.centers[i]), fnum(s.centers[j]), fnum(v)];
            row.extend(s.hpr_levels.iter().map(|&t| u8::from(v >= t).to_string()));
            row
        }),
    )
}

/// Computes every posterior summary of a fitted run and writes them to
/// `out_dir` with a manifest of file hashes.
pub fn write_posterior_summaries(run: &PosteriorRun, opts: &SummarizeOptions, out_dir: &Path) -> Result<PosteriorReport> {
    if !(opts.hdi_mass > 0.0 && opts.hdi_mass < 1.0) {
        return Err(Error::invalid(format!("HDI mass must lie in (0, 1), got {}", opts.hdi_mass)));
    }
    if !(opts.band_width > 0.0) {
        return Err(Error::invalid(format!("band width must be positive, got {}", opts.band_width)));
    }
    let ps = &run.samples;
    let domain = run.manifest.config.hyperparams().domain;
    let step = DEFAULT_STEP_1D;
    let ages = age_grid(domain, step);
    let n_bands = (domain.width() / opts.band_width).ceil() as usize;
    let bands = recipient_bands(domain.min, domain.max, opts.band_width, n_bands);
    let n = run.manifest.n_points;

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let tp = type_proportion_summary(ps, n)?;
    files.push((
        PROPORTIONS_FILE.into(),
        csv_bytes(
            &["type", "mean", "lower", "upper", "count_mean", "count_lower", "count_upper"]
                .map(String::from),
            tp.rows.iter().map(|r| {
                vec![
                    r.label.value().to_string(),
                    fnum(r.proportion.mean),
                    fnum(r.proportion.lower),
                    fnum(r.proportion.upper),
                    fnum(r.count.mean),
                    fnum(r.count.lower),
                    fnum(r.count.upper),
                ]
            }),
        ),
    ));

    let mut hdi_rows = Vec::new();
    let mut directions = Vec::new();
    for k in DIRECTIONS {
        let density = posterior_source_age_density(ps, k, &ages, step)?;
        files.push((
            density_file(k),
            csv_bytes(
                &["age".into(), "density".into()],
                ages.iter().zip(&density.values).map(|(a, v)| vec![fnum(*a), fnum(*v)]),
            ),
        ));
        let hdi = hdi_from_grid(&density, opts.hdi_mass)?;
        for (m, iv) in hdi.iter().enumerate() {
            hdi_rows.push(vec![
                k.value().to_string(),
                "posterior_mean".into(),
                "0".into(),
                (m + 1).to_string(),
                fnum(iv.lower),
                fnum(iv.upper),
            ]);
        }
        let draws = per_draw_hdis(ps, k, &ages, step, opts.hdi_mass)?;
        for (d, ivs) in draws.iter().enumerate() {
            for (m, iv) in ivs.iter().enumerate() {
                hdi_rows.push(vec![
                    k.value().to_string(),
                    "draw".into(),
                    (d + 1).to_string(),
                    (m + 1).to_string(),
                    fnum(iv.lower),
                    fnum(iv.upper),
                ]);
            }
        }
        let table = posterior_band_table(ps, k, &bands, &ages, step)?;
        files.push((bands_file(k), bands_bytes(&table)));
        let surface = flow_surface_grid(ps, k, domain, DEFAULT_STEP_2D)?;
        files.push((surface_file(k), surface_bytes(&surface)));
        directions.push(DirectionSummary {
            label: k,
            hdi_lower_median: median(draws.iter().filter_map(|v| v.first()).map(|i| i.lower).collect()),
            hdi_upper_median: median(draws.iter().filter_map(|v| v.last()).map(|i| i.upper).collect()),
            hdi,
            band_masses: table.bands.iter().copied().zip(table.band_masses.iter().copied()).collect(),
            band_draws_used: table.draws_used.clone(),
            hpr_levels: surface.hpr_levels,
            hpr_areas: [0, 1, 2].map(|l| surface.region_area(l)),
        });
    }
    files.push((
        HDI_FILE.into(),
        csv_bytes(&["type", "curve", "draw", "interval", "lower", "upper"].map(String::from), hdi_rows),
    ));

    let report = PosteriorReport {
        options: *opts,
        posterior_config_hash: run.manifest.config_hash.clone(),
        n_points: n,
        kept_samples: ps.len(),
        table: tp
            .rows
            .iter()
            .map(|r| (r.label.value().to_string(), r.proportion.format_percent(), r.count.format_count()))
            .collect(),
        male_source_fraction: tp.male_source_fraction.format_percent(),
        directions,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    files.push((SUMMARY_FILE.into(), json.into_bytes()));
    files.sort_by(|a, b| a.0.cmp(&b.0));

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut hashes = Vec::new();
    for (name, bytes) in &files {
        write_atomic(&out_dir.join(name), bytes)?;
        hashes.push((name.clone(), sha256_hex(bytes)));
    }
    let input = serde_json::to_vec(&run.manifest).ok().map(|b| sha256_hex(&b));
    write_json(
        &out_dir.join(MANIFEST_FILE),
        &ReportManifest {
            software: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input_manifest_sha256: input,
            seed: run.manifest.seed,
            files: hashes,
        },
    )?;
    Ok(report)
}

/// One-line human summary of an HDI, e.g. `[25.4, 34.3]`.
pub fn hdi_text(d: &DirectionSummary) -> String {
    format_intervals(&d.hdi)
}

/// Writes `replicates.csv`, `summary.json` and `manifest.json`.
pub fn write_replicate_outputs(cfg: &ReplicateConfig, results: &[ReplicateResult], out_dir: &Path) -> Result<ExperimentSummary> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let summary = summarize_replicates(cfg, results);
    let csv = replicates_csv_bytes(results);
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    let files = [(REPLICATES_FILE, csv), (SUMMARY_FILE, json.into_bytes())];
    let mut hashes = Vec::new();
    for (name, bytes) in &files {
        write_atomic(&out_dir.join(name), bytes)?;
        hashes.push((name.to_string(), sha256_hex(bytes)));
    }
    #[derive(Serialize)]
    struct Manifest<'a> {
        software: &'a str,
        version: &'a str,
        config: &'a ReplicateConfig,
        files: Vec<(String, String)>,
    }
    write_json(
        &out_dir.join(MANIFEST_FILE),
        &Manifest {
            software: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            files: hashes,
        },
    )?;
    Ok(summary)
}
