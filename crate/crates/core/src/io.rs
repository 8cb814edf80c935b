//! Files: the four-column dataset CSV, the flat TOML run configuration and
//! the posterior output directory.
//!
//! Every file is written through a temporary sibling and renamed into place.
//! Numbers use Rust's shortest round-trip formatting and no file carries a
//! timestamp, so identical inputs give byte-identical outputs.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::SymMat2;
use crate::model::{sticks_from_weights, AgeDomain, BvnComponent, DataPoint, Hyperparams, MarkParams, ModelState, TypeLabel, TypedMixture};
use crate::posterior::{classification_entropy, summarize_trace, type_proportion_summary, TraceSummary, TypeProportionSummary};
use crate::sampler::{type_tag, McmcConfig, PosteriorSamples, Traces};
use crate::simulate::{Scenario, SimulatedData};

pub const CSV_HEADER: [&str; 4] = ["male_age", "female_age", "linkage_score", "direction_score"];
pub const DEFAULT_FILTER_THRESHOLD: f64 = 0.2;
pub const DEFAULT_CLAMP_EPS: f64 = 1e-6;

pub const TRACES_FILE: &str = "traces.csv";
pub const ASSIGNMENTS_FILE: &str = "assignments.csv";
pub const MIXTURES_FILE: &str = "mixtures.csv";
pub const SOURCE_DENSITY_FILE: &str = "source_age_density.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt as _;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644)).map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub(crate) fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Where the points came from and what ingestion did to them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    pub filter_threshold: f64,
    pub clamp_eps: f64,
    pub raw_rows: usize,
    pub retained_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<DataPoint>,
    /// 1-based data-row number of each retained point in the source file.
    pub source_rows: Vec<usize>,
    pub provenance: Provenance,
}

impl Dataset {
    /// In-memory dataset with no source file and no filtering.
    pub fn from_points(points: Vec<DataPoint>) -> Self {
        let n = points.len();
        Self {
            points,
            source_rows: (1..=n).collect(),
            provenance: Provenance {
                source: None,
                filter_threshold: 0.0,
                clamp_eps: DEFAULT_CLAMP_EPS,
                raw_rows: n,
                retained_rows: n,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadOptions {
    /// Rows with a linkage score below this are dropped.
    pub filter_threshold: f64,
    /// Linkage scores are clamped to `[eps, 1 − eps]`.
    pub clamp_eps: f64,
    pub domain: AgeDomain,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            filter_threshold: DEFAULT_FILTER_THRESHOLD,
            clamp_eps: DEFAULT_CLAMP_EPS,
            domain: AgeDomain::default(),
        }
    }
}

/// Reads a dataset CSV with the exact header
/// `male_age,female_age,linkage_score,direction_score`.
///
/// Every row is validated before filtering: ages must lie in the domain and
/// scores in `[0, 1]`. Rows below the linkage threshold are then dropped and
/// linkage scores clamped. Direction scores of exactly 0 or 1 are kept as is
/// and flagged.
pub fn load_dataset_csv(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    if !(opts.clamp_eps > 0.0 && opts.clamp_eps < 0.5) {
        return Err(Error::Config(format!("clamp_eps must lie in (0, 0.5), got {}", opts.clamp_eps)));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let header = reader.headers().map_err(|e| format_err(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(format_err(format!(
            "header must be exactly `{}`, found `{}`",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    let mut source_rows = Vec::new();
    let mut raw_rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let row_err = |message: String| Error::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let record = record.map_err(|e| row_err(e.to_string()))?;
        if record.len() != 4 {
            return Err(row_err(format!("expected 4 columns, found {}", record.len())));
        }
        let mut vals = [0.0; 4];
        for (j, cell) in record.iter().enumerate() {
            vals[j] = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| row_err(format!("{}: `{cell}` is not a finite number", CSV_HEADER[j])))?;
        }
        let [male, female, link, dir] = vals;
        for (name, age) in [("male_age", male), ("female_age", female)] {
            if !opts.domain.contains(age) {
                return Err(row_err(format!(
                    "{name} {age} outside [{}, {})",
                    opts.domain.min, opts.domain.max
                )));
            }
        }
        for (name, score) in [("linkage_score", link), ("direction_score", dir)] {
            if !(0.0..=1.0).contains(&score) {
                return Err(row_err(format!("{name} {score} outside [0, 1]")));
            }
        }
        raw_rows += 1;
        if link < opts.filter_threshold {
            continue;
        }
        let link = link.clamp(opts.clamp_eps, 1.0 - opts.clamp_eps);
        points.push(DataPoint::new(male, female, link, dir));
        source_rows.push(row);
    }
    if points.is_empty() {
        return Err(format_err(format!(
            "no rows retained ({raw_rows} read, linkage threshold {})",
            opts.filter_threshold
        )));
    }
    Ok(Dataset {
        provenance: Provenance {
            source: Some(path.to_path_buf()),
            filter_threshold: opts.filter_threshold,
            clamp_eps: opts.clamp_eps,
            raw_rows,
            retained_rows: points.len(),
        },
        points,
        source_rows,
    })
}

pub fn dataset_csv_bytes(points: &[DataPoint]) -> Vec<u8> {
    let header: Vec<String> = CSV_HEADER.iter().map(|s| s.to_string()).collect();
    csv_bytes(
        &header,
        points.iter().map(|p| {
            vec![
                p.location[0].to_string(),
                p.location[1].to_string(),
                p.linkage().to_string(),
                p.direction().to_string(),
            ]
        }),
    )
}

pub fn write_dataset_csv(path: &Path, points: &[DataPoint]) -> Result<()> {
    write_atomic(path, &dataset_csv_bytes(points))
}

/// Ground truth written next to a simulated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub scenario: Scenario,
    pub seed: u64,
    pub n: usize,
    /// Realized `#(+1) / (#(+1) + #(-1))` in this sample.
    pub sample_male_source_fraction: Option<f64>,
    pub labels: Vec<TypeLabel>,
    /// 0-based component index within the point's type.
    pub components: Vec<usize>,
}

/// `d.csv` → `d.csv.truth.json`.
pub fn truth_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

pub fn write_simulation(path: &Path, sim: &SimulatedData, scenario: &Scenario, seed: u64) -> Result<PathBuf> {
    write_dataset_csv(path, &sim.points)?;
    let count = |k| sim.labels.iter().filter(|&&c| c == k).count() as f64;
    let (mf, fm) = (count(TypeLabel::MaleToFemale), count(TypeLabel::FemaleToMale));
    let truth = TruthSidecar {
        scenario: scenario.clone(),
        seed,
        n: sim.points.len(),
        sample_male_source_fraction: (mf + fm > 0.0).then(|| mf / (mf + fm)),
        labels: sim.labels.clone(),
        components: sim.components.clone(),
    };
    let tp = truth_path(path);
    write_json(&tp, &truth)?;
    Ok(tp)
}

pub fn read_truth(path: &Path) -> Result<TruthSidecar> {
    read_json(path)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// Latent event types are sampled.
    #[default]
    Full,
    /// Types are fixed by thresholding the scores; other points are dropped.
    Subset,
}

/// Flat run configuration. Every key is optional; defaults reproduce the
/// benchmark prior setup and chain length. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: FitMode,

    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub fix_mark_means: bool,
    pub fixed_mu_l: f64,
    pub fixed_mu_d: f64,
    pub fixed_mu_neg_d: f64,
    pub warmup: usize,

    pub a0: f64,
    pub b0: f64,
    pub nu0: f64,
    pub sigma0_sq: f64,
    pub q: [f64; 3],
    pub theta0: [f64; 2],
    /// `[xx, xy, yy]`
    pub sigma0: [f64; 3],
    pub nu: f64,
    /// `[xx, xy, yy]`
    pub s0: [f64; 3],
    pub alpha_shape: f64,
    pub alpha_rate: f64,
    pub truncation: usize,
    pub age_min: f64,
    pub age_max: f64,

    pub filter_threshold: f64,
    pub clamp_eps: f64,

    pub subset_linkage_threshold: f64,
    pub subset_direction_threshold: f64,
    /// Use the stricter rule `d < 0.33 → -1`, `d > 0.67 → +1`, others dropped.
    pub subset_strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_parts(&Hyperparams::default(), &McmcConfig::default())
    }
}

impl RunConfig {
    pub fn from_parts(hp: &Hyperparams, mc: &McmcConfig) -> Self {
        Self {
            mode: FitMode::Full,
            iterations: mc.iterations,
            burn_in: mc.burn_in,
            thin: mc.thin,
            seed: mc.seed,
            fix_mark_means: mc.fix_mark_means,
            fixed_mu_l: mc.fixed_mu_l,
            fixed_mu_d: mc.fixed_mu_d,
            fixed_mu_neg_d: mc.fixed_mu_neg_d,
            warmup: mc.warmup,
            a0: hp.a0,
            b0: hp.b0,
            nu0: hp.nu0,
            sigma0_sq: hp.sigma0_sq,
            q: hp.q,
            theta0: hp.theta0,
            sigma0: hp.sigma0.to_array(),
            nu: hp.nu,
            s0: hp.s0.to_array(),
            alpha_shape: hp.alpha_shape,
            alpha_rate: hp.alpha_rate,
            truncation: hp.truncation,
            age_min: hp.domain.min,
            age_max: hp.domain.max,
            filter_threshold: DEFAULT_FILTER_THRESHOLD,
            clamp_eps: DEFAULT_CLAMP_EPS,
            subset_linkage_threshold: 0.6,
            subset_direction_threshold: 0.5,
            subset_strict: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparams().validate()?;
        self.mcmc_config().validate()?;
        if !(0.0..1.0).contains(&self.filter_threshold) {
            return Err(Error::Config("filter_threshold must lie in [0, 1)".into()));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return Err(Error::Config("clamp_eps must lie in (0, 0.5)".into()));
        }
        if !((0.0..1.0).contains(&self.subset_linkage_threshold) && (0.0..1.0).contains(&self.subset_direction_threshold)) {
            return Err(Error::Config("subset thresholds must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn hyperparams(&self) -> Hyperparams {
        let m = |a: [f64; 3]| SymMat2::new(a[0], a[1], a[2]);
        Hyperparams {
            a0: self.a0,
            b0: self.b0,
            nu0: self.nu0,
            sigma0_sq: self.sigma0_sq,
            q: self.q,
            theta0: self.theta0,
            sigma0: m(self.sigma0),
            nu: self.nu,
            s0: m(self.s0),
            alpha_shape: self.alpha_shape,
            alpha_rate: self.alpha_rate,
            truncation: self.truncation,
            domain: AgeDomain::new(self.age_min, self.age_max),
        }
    }

    pub fn mcmc_config(&self) -> McmcConfig {
        McmcConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.seed,
            fix_mark_means: self.fix_mark_means,
            fixed_mu_l: self.fixed_mu_l,
            fixed_mu_d: self.fixed_mu_d,
            fixed_mu_neg_d: self.fixed_mu_neg_d,
            warmup: self.warmup,
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            filter_threshold: self.filter_threshold,
            clamp_eps: self.clamp_eps,
            domain: AgeDomain::new(self.age_min, self.age_max),
        }
    }

    pub fn subset_rule(&self) -> SubsetRule {
        if self.subset_strict {
            SubsetRule::Strict {
                linkage: self.subset_linkage_threshold,
            }
        } else {
            SubsetRule::Threshold {
                linkage: self.subset_linkage_threshold,
                direction: self.subset_direction_threshold,
            }
        }
    }

    /// SHA-256 of the complete configuration.
    pub fn hash(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }

    /// SHA-256 of everything except the mode and subset keys, so full and
    /// subset runs of one model share it.
    pub fn model_hash(&self) -> String {
        let mut c = self.clone();
        c.mode = FitMode::Full;
        let d = RunConfig::default();
        c.subset_linkage_threshold = d.subset_linkage_threshold;
        c.subset_direction_threshold = d.subset_direction_threshold;
        c.subset_strict = d.subset_strict;
        sha256_hex(c.to_toml().as_bytes())
    }
}

/// Pre-classification rule of the subset analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SubsetRule {
    /// `ℓ > linkage`; `+1` when `d > direction`, else `-1`.
    Threshold { linkage: f64, direction: f64 },
    /// `ℓ > linkage`; `+1` when `d > 0.67`, `-1` when `d < 0.33`, else dropped.
    Strict { linkage: f64 },
}

impl Default for SubsetRule {
    fn default() -> Self {
        SubsetRule::Threshold {
            linkage: 0.6,
            direction: 0.5,
        }
    }
}

impl SubsetRule {
    pub fn classify(&self, p: &DataPoint) -> Option<TypeLabel> {
        let (l, d) = (p.linkage(), p.direction());
        match *self {
            SubsetRule::Threshold { linkage, direction } => (l > linkage).then_some({
                if d > direction {
                    TypeLabel::MaleToFemale
                } else {
                    TypeLabel::FemaleToMale
                }
            }),
            SubsetRule::Strict { linkage } if l > linkage => {
                if d > 0.67 {
                    Some(TypeLabel::MaleToFemale)
                } else if d < 0.33 {
                    Some(TypeLabel::FemaleToMale)
                } else {
                    None
                }
            }
            SubsetRule::Strict { .. } => None,
        }
    }
}

/// Keeps the points the rule classifies and returns their frozen labels.
pub fn apply_fixed_type_classification(ds: &Dataset, rule: SubsetRule) -> (Dataset, Vec<TypeLabel>) {
    let mut points = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (p, &r) in ds.points.iter().zip(&ds.source_rows) {
        if let Some(c) = rule.classify(p) {
            points.push(*p);
            rows.push(r);
            labels.push(c);
        }
    }
    let mut provenance = ds.provenance.clone();
    provenance.retained_rows = points.len();
    (
        Dataset {
            points,
            source_rows: rows,
            provenance,
        },
        labels,
    )
}

/// Run metadata stored with every posterior directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub model_hash: String,
    pub mode: FitMode,
    pub config: RunConfig,
    pub provenance: Provenance,
    pub n_points: usize,
    pub kept_samples: usize,
    /// SHA-256 of each numeric output file, sorted by name.
    pub files: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n_points: usize,
    pub kept_samples: usize,
    pub type_proportions: TypeProportionSummary,
    /// Table-style strings: label, proportion, count.
    pub table: Vec<(String, String, String)>,
    pub male_source_fraction: String,
    pub flexible_points: usize,
    pub traces: Vec<(String, Option<TraceSummary>)>,
}

pub(crate) fn fnum(x: f64) -> String {
    x.to_string()
}

fn traces_bytes(t: &Traces) -> Vec<u8> {
    let mut header = vec!["iteration".to_string()];
    header.extend(t.names.iter().cloned());
    csv_bytes(
        &header,
        (0..t.len()).map(|r| {
            let mut row = vec![(r + 1).to_string()];
            row.extend(t.columns.iter().map(|c| fnum(c[r])));
            row
        }),
    )
}

fn assignments_bytes(freq: &[[f64; 3]]) -> Vec<u8> {
    let header: Vec<String> = ["point", "p_fm", "p_none", "p_mf", "entropy", "modal"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    csv_bytes(
        &header,
        freq.iter().enumerate().map(|(i, f)| {
            let e = classification_entropy(f);
            vec![
                (i + 1).to_string(),
                fnum(f[0]),
                fnum(f[1]),
                fnum(f[2]),
                fnum(e.entropy),
                e.modal.value().to_string(),
            ]
        }),
    )
}

const MIXTURE_COLUMNS: [&str; 10] = [
    "draw", "type", "component", "weight", "alpha", "mean_male", "mean_female", "cov_xx", "cov_xy", "cov_yy",
];

fn mixtures_bytes(ps: &PosteriorSamples) -> Vec<u8> {
    let header: Vec<String> = MIXTURE_COLUMNS.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (d, s) in ps.draws.iter().enumerate() {
        for k in TypeLabel::ALL {
            let m = s.mixture(k);
            for (h, (w, c)) in m.weights.iter().zip(&m.components).enumerate() {
                rows.push(vec![
                    (d + 1).to_string(),
                    k.value().to_string(),
                    (h + 1).to_string(),
                    fnum(*w),
                    fnum(m.alpha),
                    fnum(c.mean[0]),
                    fnum(c.mean[1]),
                    fnum(c.cov.xx),
                    fnum(c.cov.xy),
                    fnum(c.cov.yy),
                ]);
            }
        }
    }
    csv_bytes(&header, rows)
}

/// Builds the summary stored as `summary.json`.
pub fn fit_summary(ps: &PosteriorSamples, n_points: usize) -> Result<FitSummary> {
    let tp = type_proportion_summary(ps, n_points)?;
    let table = tp
        .rows
        .iter()
        .map(|r| {
            (
                r.label.value().to_string(),
                r.proportion.format_percent(),
                r.count.format_count(),
            )
        })
        .collect();
    let flexible_points = ps
        .assignment_freq
        .iter()
        .filter(|f| classification_entropy(f).flexible)
        .count();
    let traces = ps
        .traces
        .names
        .iter()
        .zip(&ps.traces.columns)
        .map(|(n, c)| (n.clone(), summarize_trace(c).ok()))
        .collect();
    Ok(FitSummary {
        n_points,
        kept_samples: ps.len(),
        male_source_fraction: tp.male_source_fraction.format_percent(),
        type_proportions: tp,
        table,
        flexible_points,
        traces,
    })
}

/// Writes traces, the assignment table, per-draw mixtures, the posterior
/// mean source-age densities, `summary.json` and `manifest.json`.
pub fn write_posterior_outputs(ps: &PosteriorSamples, ds: &Dataset, cfg: &RunConfig, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let hp = cfg.hyperparams();
    let ages = crate::posterior::age_grid(hp.domain, crate::posterior::DEFAULT_STEP_1D);
    let step = crate::posterior::DEFAULT_STEP_1D;
    let fm = crate::posterior::posterior_source_age_density(ps, TypeLabel::FemaleToMale, &ages, step)?;
    let mf = crate::posterior::posterior_source_age_density(ps, TypeLabel::MaleToFemale, &ages, step)?;
    let density = csv_bytes(
        &["age".into(), "female_source_fm".into(), "male_source_mf".into()],
        ages.iter()
            .enumerate()
            .map(|(i, a)| vec![fnum(*a), fnum(fm.values[i]), fnum(mf.values[i])]),
    );
    let mut summary = serde_json::to_string_pretty(&fit_summary(ps, ds.len())?).expect("summary serializes");
    summary.push('\n');

    let files: Vec<(&str, Vec<u8>)> = vec![
        (ASSIGNMENTS_FILE, assignments_bytes(&ps.assignment_freq)),
        (MIXTURES_FILE, mixtures_bytes(ps)),
        (SOURCE_DENSITY_FILE, density),
        (SUMMARY_FILE, summary.into_bytes()),
        (TRACES_FILE, traces_bytes(&ps.traces)),
    ];
    let mut hashes = Vec::new();
    for (name, bytes) in &files {
        write_atomic(&out_dir.join(name), bytes)?;
        hashes.push((name.to_string(), sha256_hex(bytes)));
    }
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        model_hash: cfg.model_hash(),
        mode: cfg.mode,
        config: cfg.clone(),
        provenance: ds.provenance.clone(),
        n_points: ds.len(),
        kept_samples: ps.len(),
        files: hashes,
    };
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    read_json(&dir.join(MANIFEST_FILE))
}

fn parse_cell(path: &Path, row: usize, col: &str, cell: &str) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| Error::Row {
        path: path.to_path_buf(),
        row,
        message: format!("{col}: `{cell}` is not a number"),
    })
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Row {
            path: path.to_path_buf(),
            row: i + 1,
            message: e.to_string(),
        })?;
        let vals = rec
            .iter()
            .zip(&header)
            .map(|(c, h)| parse_cell(path, i + 1, h, c))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(vals);
    }
    Ok((header, rows))
}

/// A fitted run read back from disk.
#[derive(Clone, Debug)]
pub struct PosteriorRun {
    pub manifest: Manifest,
    /// Draws carry type probabilities, mark parameters and mixtures; their
    /// per-point labels are not stored and are left empty.
    pub samples: PosteriorSamples,
}

pub fn read_posterior_dir(dir: &Path) -> Result<PosteriorRun> {
    let manifest = read_manifest(dir)?;
    let tpath = dir.join(TRACES_FILE);
    let (names, rows) = read_table(&tpath)?;
    let col = |name: &str| -> Result<usize> {
        names.iter().position(|n| n == name).ok_or_else(|| Error::Format {
            path: tpath.clone(),
            message: format!("missing column `{name}`"),
        })
    };
    let idx = [
        col("gamma")?,
        col("p_fm")?,
        col("p_none")?,
        col("p_mf")?,
        col("mu_link")?,
        col("mu_dir_mf")?,
        col("mu_dir_fm")?,
        col("var_link")?,
        col("var_dir")?,
    ];
    let traces = Traces {
        names: names[1..].to_vec(),
        columns: (1..names.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect(),
    };
    let h_max = manifest.config.truncation;
    let mpath = dir.join(MIXTURES_FILE);
    let (mnames, mrows) = read_table(&mpath)?;
    if mnames != MIXTURE_COLUMNS {
        return Err(Error::Format {
            path: mpath,
            message: "unexpected mixture columns".into(),
        });
    }
    if mrows.len() != rows.len() * 3 * h_max {
        return Err(Error::Format {
            path: mpath,
            message: format!("expected {} rows, found {}", rows.len() * 3 * h_max, mrows.len()),
        });
    }
    let mut draws = Vec::with_capacity(rows.len());
    for (d, r) in rows.iter().enumerate() {
        let mut mixtures = Vec::with_capacity(3);
        for k in 0..3 {
            let block = &mrows[(d * 3 + k) * h_max..(d * 3 + k + 1) * h_max];
            let weights: Vec<f64> = block.iter().map(|m| m[3]).collect();
            let components = block
                .iter()
                .map(|m| BvnComponent::new([m[5], m[6]], SymMat2::new(m[7], m[8], m[9])))
                .collect();
            mixtures.push(TypedMixture {
                sticks: sticks_from_weights(&weights),
                weights,
                components,
                alpha: block[0][4],
            });
        }
        let mixtures: [TypedMixture; 3] = mixtures.try_into().expect("three types");
        draws.push(ModelState {
            gamma: r[idx[0]],
            type_probs: [r[idx[1]], r[idx[2]], r[idx[3]]],
            mixtures,
            mark_params: MarkParams {
                mu_link: r[idx[4]],
                mu_dir_mf: r[idx[5]],
                mu_dir_fm: r[idx[6]],
                var_link: r[idx[7]],
                var_dir: r[idx[8]],
                fixed_means: manifest.config.fix_mark_means,
            },
            labels: Vec::new(),
            components: Vec::new(),
        });
    }
    let (_, arows) = read_table(&dir.join(ASSIGNMENTS_FILE))?;
    let assignment_freq = arows.iter().map(|r| [r[1], r[2], r[3]]).collect();
    Ok(PosteriorRun {
        manifest,
        samples: PosteriorSamples {
            draws,
            traces,
            assignment_freq,
        },
    })
}

/// Column name used for a type in output tables.
pub fn type_column(k: TypeLabel) -> String {
    format!("p_{}", type_tag(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn filter_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.csv",
            "male_age,female_age,linkage_score,direction_score\n30,25,0.9,1.0\n31,22,0.1,0.5\n40,35,0.7,0.2\n",
        );
        let ds = load_dataset_csv(&p, &LoadOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!((ds.provenance.raw_rows, ds.provenance.retained_rows), (3, 2));
        assert!(ds.points[0].extreme_direction);
        assert!(!ds.points[1].extreme_direction);
        assert_eq!(ds.source_rows, vec![1, 3]);
    }

    #[test]
    fn linkage_is_clamped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.csv", "male_age,female_age,linkage_score,direction_score\n30,25,1.0,0.4\n");
        let ds = load_dataset_csv(&p, &LoadOptions::default()).unwrap();
        assert_eq!(ds.points[0].linkage(), 1.0 - 1e-6);
    }

    #[test]
    fn bad_inputs_report_rows() {
        let dir = tempfile::tempdir().unwrap();
        let h = "male_age,female_age,linkage_score,direction_score\n";
        let cases = [
            ("a.csv", format!("{h}30,25,0.9,0.5\n30,abc,0.9,0.5\n"), "row 2"),
            ("b.csv", format!("{h}30,25,0.9,0.5\n30,25,0.9,0.5\n12,25,0.9,0.5\n"), "row 3"),
            ("c.csv", format!("{h}30,25,0.9\n"), "row 1"),
            ("d.csv", "male_age,female_age,linkage\n30,25,0.9\n".to_string(), "header"),
            ("e.csv", format!("{h}30,25,0.1,0.5\n"), "no rows retained"),
            ("f.csv", format!("{h}30,25,1.5,0.5\n"), "row 1"),
        ];
        for (name, text, needle) in cases {
            let p = write(dir.path(), name, &text);
            let e = load_dataset_csv(&p, &LoadOptions::default()).unwrap_err().to_string();
            assert!(e.contains(needle), "{name}: {e}");
        }
    }

    #[test]
    fn subset_rule() {
        let r = SubsetRule::default();
        assert_eq!(r.classify(&DataPoint::new(30.0, 25.0, 0.7, 0.8)), Some(TypeLabel::MaleToFemale));
        assert_eq!(r.classify(&DataPoint::new(30.0, 25.0, 0.7, 0.3)), Some(TypeLabel::FemaleToMale));
        assert_eq!(r.classify(&DataPoint::new(30.0, 25.0, 0.5, 0.9)), None);
        let s = SubsetRule::Strict { linkage: 0.6 };
        assert_eq!(s.classify(&DataPoint::new(30.0, 25.0, 0.7, 0.5)), None);
        assert_eq!(s.classify(&DataPoint::new(30.0, 25.0, 0.7, 0.2)), Some(TypeLabel::FemaleToMale));
    }

    #[test]
    fn config_defaults_and_unknown_keys() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.hyperparams(), Hyperparams::default());
        let c = RunConfig::parse("iterations = 500\nburn_in = 100\nmode = \"subset\"\n").unwrap();
        assert_eq!((c.iterations, c.mode), (500, FitMode::Subset));
        assert!(RunConfig::parse("iters = 5\n").is_err());
        assert!(RunConfig::parse("burn_in = 5000\n").is_err());
        let round = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(round, c);
        assert_ne!(c.hash(), RunConfig::default().hash());
        let mut full = c.clone();
        full.mode = FitMode::Full;
        assert_eq!(c.model_hash(), full.model_hash());
    }
}
