//! Parameter sweeps with CSV output.

pub mod convergence;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{charging_metrics, ChargingOutcome};
use crate::model::{ModelKind, ModelSpec, NumericsConfig, Side, DEFAULT_EPSILON};

pub use convergence::{convergence_check, converged_quantum_run, CheckedSpec, ConvergedRun};

pub const CSV_HEADER: [&str; 15] = [
    "model",
    "side",
    "N",
    "g_over_omega0",
    "epsilon",
    "cutoff",
    "tau_bar",
    "E_bar_norm",
    "P_bar_norm",
    "gamma",
    "ratio",
    "norm_drift",
    "energy_drift",
    "wall_time_s",
    "status",
];

fn default_epsilon() -> Vec<f64> {
    vec![DEFAULT_EPSILON]
}

fn default_omega0() -> f64 {
    1.0
}

fn default_output() -> PathBuf {
    PathBuf::from("results.csv")
}

/// Sweep description, usually read from TOML. Couplings are in units of
/// `omega0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub models: Vec<ModelKind>,
    pub sides: Vec<Side>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub g: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_omega0")]
    pub omega0: f64,
    /// Fixed photon cutoff; unset selects the doubling policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Wall time breaks byte-reproducibility of the CSV, so it is opt-in.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub numerics: NumericsConfig,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("models", self.models.is_empty()),
            ("sides", self.sides.is_empty()),
            ("N", self.n.is_empty()),
            ("g", self.g.is_empty()),
            ("epsilon", self.epsilon.is_empty()),
        ];
        for (name, empty) in lists {
            if empty {
                return Err(Error::Config(format!("{name} list is empty")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        for spec in self.points() {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            if spec.g == 0.0 {
                return Err(Error::Config("g must be positive".into()));
            }
        }
        Ok(())
    }

    fn spec(&self, kind: ModelKind, side: Side, n: usize, g: f64, epsilon: f64) -> ModelSpec {
        let mut spec = ModelSpec::new(kind, side, n, g * self.omega0)
            .with_omega0(self.omega0)
            .with_epsilon(epsilon)
            .with_numerics(self.numerics.clone());
        spec.cutoff = self.cutoff;
        spec
    }

    /// Sweep points in output order.
    pub fn points(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for &kind in &self.models {
            for &side in &self.sides {
                for &n in &self.n {
                    for &g in &self.g {
                        for &eps in &self.epsilon {
                            out.push(self.spec(kind, side, n, g, eps));
                        }
                    }
                }
            }
        }
        out
    }
}

/// One CSV line. Energies, powers and times are scaled by `omega0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub model: ModelKind,
    pub side: Side,
    #[serde(rename = "N")]
    pub n: usize,
    pub g_over_omega0: f64,
    pub epsilon: f64,
    pub cutoff: Option<usize>,
    pub tau_bar: Option<f64>,
    #[serde(rename = "E_bar_norm")]
    pub e_bar_norm: Option<f64>,
    #[serde(rename = "P_bar_norm")]
    pub p_bar_norm: Option<f64>,
    pub gamma: Option<f64>,
    pub ratio: Option<f64>,
    pub norm_drift: Option<f64>,
    pub energy_drift: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Finished sweep.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<ResultRow>,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

/// The spec with parameters that cannot affect the run normalised, so that
/// such points share one engine run.
fn run_key(spec: &ModelSpec) -> ModelSpec {
    let mut key = spec.clone();
    if !(spec.side == Side::Classical && spec.kind.has_spin_coordinates()) {
        key.epsilon = DEFAULT_EPSILON;
        key.phi0 = 0.0;
    }
    if !(spec.side == Side::Quantum && spec.kind == ModelKind::Dicke) {
        key.cutoff = None;
    }
    key
}

struct RunResult {
    outcome: Result<ChargingOutcome, String>,
    seconds: f64,
}

impl RunResult {
    /// The outcome if the run succeeded and passed every drift check.
    fn valid(&self) -> Option<&ChargingOutcome> {
        self.outcome.as_ref().ok().filter(|o| o.diagnostics.violations().is_empty())
    }
}

fn run_point(spec: &ModelSpec) -> RunResult {
    let start = Instant::now();
    let outcome = charging_metrics(spec).map_err(|e| e.to_string());
    RunResult { outcome, seconds: start.elapsed().as_secs_f64() }
}

/// CSV row for one sweep point.
fn build_row(
    spec: &ModelSpec,
    run: &RunResult,
    gamma: Option<f64>,
    ratio: Option<f64>,
    record_wall_time: bool,
) -> ResultRow {
    let w = spec.omega0;
    let scale = spec.n as f64 * w;
    let mut row = ResultRow {
        model: spec.kind,
        side: spec.side,
        n: spec.n,
        g_over_omega0: spec.g / w,
        epsilon: spec.epsilon,
        cutoff: None,
        tau_bar: None,
        e_bar_norm: None,
        p_bar_norm: None,
        gamma,
        ratio,
        norm_drift: None,
        energy_drift: None,
        wall_time_s: record_wall_time.then_some(run.seconds),
        status: String::new(),
    };
    match &run.outcome {
        Ok(o) => {
            let d = &o.diagnostics;
            row.cutoff = d.cutoff;
            row.tau_bar = Some(o.metrics.tau_bar * w);
            row.e_bar_norm = Some(o.metrics.e_bar / scale);
            row.p_bar_norm = Some(o.metrics.p_bar / (scale * w));
            row.norm_drift = d.norm_drift;
            row.energy_drift = Some(d.energy_drift / scale);
            let violations = d.violations();
            row.status = if violations.is_empty() {
                "ok".into()
            } else {
                format!("invalid: {}", violations.join("; "))
            };
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    config: &'a SweepConfig,
    runs: Vec<ManifestRun>,
}

#[derive(Serialize)]
struct ManifestRun {
    spec: ModelSpec,
    audit: Vec<String>,
    status: String,
}

/// Path of the manifest written next to `csv`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.toml");
    csv.with_file_name(name)
}

/// Runs every sweep point (and the single-unit references needed for
/// Gamma) on a worker pool. Rows follow config order regardless of
/// completion order.
pub fn sweep_rows(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    compute(config).map(|(rows, _)| rows)
}

fn compute(config: &SweepConfig) -> Result<(Vec<ResultRow>, Vec<ManifestRun>)> {
    config.validate()?;
    let points = config.points();

    // unique runs: every point plus its N = 1 reference
    let mut runs: Vec<ModelSpec> = Vec::new();
    let index_of = |spec: &ModelSpec, runs: &mut Vec<ModelSpec>| {
        let key = run_key(spec);
        match runs.iter().position(|s| *s == key) {
            Some(i) => i,
            None => {
                runs.push(key);
                runs.len() - 1
            }
        }
    };
    let mut point_runs = Vec::with_capacity(points.len());
    for spec in &points {
        let own = index_of(spec, &mut runs);
        let single = index_of(&spec.clone().with_n(1), &mut runs);
        point_runs.push((own, single));
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = config.workers {
        pool = pool.num_threads(workers);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<RunResult> = pool.install(|| runs.par_iter().map(run_point).collect());

    let gammas: Vec<Option<f64>> = points
        .iter()
        .zip(&point_runs)
        .map(|(spec, &(own, single))| {
            let (a, b) = (results[own].valid()?, results[single].valid()?);
            Some(a.metrics.p_bar / (spec.n as f64 * b.metrics.p_bar))
        })
        .collect();
    let ratio_of = |i: usize| -> Option<f64> {
        let spec = &points[i];
        let twin_side = match spec.side {
            Side::Quantum => Side::Classical,
            Side::Classical => Side::Quantum,
        };
        let twin = points.iter().position(|s| *s == spec.clone().with_side(twin_side))?;
        let (own, other) = (gammas[i]?, gammas[twin]?);
        Some(match spec.side {
            Side::Quantum => own / other,
            Side::Classical => other / own,
        })
    };

    let rows: Vec<ResultRow> = points
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let (own, single) = point_runs[i];
            let mut row = build_row(spec, &results[own], gammas[i], ratio_of(i), config.record_wall_time);
            if row.is_ok() && results[single].valid().is_none() {
                let reason = match &results[single].outcome {
                    Ok(o) => o.diagnostics.violations().join("; "),
                    Err(e) => e.clone(),
                };
                row.status = format!("invalid: N = 1 reference: {reason}");
            }
            row
        })
        .collect();

    let manifest_runs = runs
        .iter()
        .zip(&results)
        .map(|(spec, r)| match &r.outcome {
            Ok(o) => ManifestRun { spec: o.spec.clone(), audit: o.audit.clone(), status: "ok".into() },
            Err(e) => ManifestRun { spec: spec.clone(), audit: Vec::new(), status: e.clone() },
        })
        .collect();
    Ok((rows, manifest_runs))
}

/// [`sweep_rows`], then writes the CSV and its manifest.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let (rows, runs) = compute(config)?;
    if let Some(dir) = config.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_csv(&config.output, &rows)?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config,
        runs,
    };
    let manifest_path = manifest_path(&config.output);
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&manifest_path, text)?;

    Ok(SweepReport { rows, csv_path: config.output.clone(), manifest_path })
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_csv_to(fs::File::create(path)?, rows)
}

pub fn write_csv_to<W: std::io::Write>(sink: W, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Rows of a results CSV, as strings keyed by column.
pub fn read_csv(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("{}: unexpected CSV header", path.display())));
    }
    reader.records().map(|r| r.map_err(Error::from)).collect()
}
