//! Sweeps over box sizes and seeds, long-form result tables, log-log fits
//! and report files.
//!
//! Each instance `(n, seed)` samples a bond configuration, extracts the
//! largest cluster and evaluates the requested quantities, producing rows
//! `d,p,n,seed,quantity,value,certification,detail`.

mod instance;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{linear_fit, LinearFit};
use crate::walk::{MixingMode, DEFAULT_POISSON_TOL};

pub use instance::{analyze_instance, instance_profile, InstanceProfile};
pub use report::{emit_report, read_rows, write_rows, write_rows_to, EmittedFiles, QuantitySummary, Summary};

/// Version of the CSV and summary layouts.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Tau1,
    Tau2,
    PhiUpper,
    Lk,
    VarLower,
    Census,
    Fpp,
    Renorm,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::Tau1,
        Quantity::Tau2,
        Quantity::PhiUpper,
        Quantity::Lk,
        Quantity::VarLower,
        Quantity::Census,
        Quantity::Fpp,
        Quantity::Renorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Tau1 => "tau1",
            Quantity::Tau2 => "tau2",
            Quantity::PhiUpper => "phi-upper",
            Quantity::Lk => "lk",
            Quantity::VarLower => "var-lower",
            Quantity::Census => "census",
            Quantity::Fpp => "fpp",
            Quantity::Renorm => "renorm",
        }
    }

    /// The configured quantity a row name belongs to.
    pub fn of_row(row: &str) -> Option<Quantity> {
        Quantity::ALL.into_iter().find(|q| {
            let name = q.name();
            row == name || row.strip_prefix(name).is_some_and(|rest| rest.starts_with('-'))
        })
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('_', "-");
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == norm)
            .ok_or_else(|| Error::Validation(format!("unknown quantity {s:?}")))
    }
}

/// Row certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// Computed exactly, or to a stated numerical tolerance.
    Exact,
    UpperBound,
    /// Statistical estimates and bounds built from non-rigorous inputs.
    Heuristic,
    Error,
}

impl Certification {
    pub fn as_str(self) -> &'static str {
        match self {
            Certification::Exact => "exact",
            Certification::UpperBound => "upper-bound",
            Certification::Heuristic => "heuristic",
            Certification::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub d: usize,
    pub p: f64,
    pub n: u32,
    pub seed: u64,
    pub quantity: String,
    pub value: f64,
    pub certification: Certification,
    pub detail: String,
}

impl Row {
    /// Rows named `check-*` record inequality checks: value 1 for a pass,
    /// 0 for a violation.
    pub fn is_check(&self) -> bool {
        self.quantity.starts_with("check-")
    }
}

fn default_quantities() -> Vec<Quantity> {
    vec![
        Quantity::Tau1,
        Quantity::Tau2,
        Quantity::PhiUpper,
        Quantity::Lk,
        Quantity::VarLower,
    ]
}

fn default_poisson_tol() -> f64 {
    DEFAULT_POISSON_TOL
}

fn default_eig_rtol() -> f64 {
    1e-10
}

fn default_fpp_pairs() -> usize {
    300
}

fn default_blocks() -> Vec<u32> {
    vec![8]
}

fn default_workers() -> usize {
    1
}

fn default_mode() -> MixingMode {
    MixingMode::PairwiseSup
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// A sweep description. Loaded from a flat TOML file whose keys are the
/// field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub p: f64,
    pub n_list: Vec<u32>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
    #[serde(default = "default_mode")]
    pub mode: MixingMode,
    /// Mixing-time bracket width; `None` means `max(1e-3, 1e-3 τ2)`.
    #[serde(default)]
    pub resolution: Option<f64>,
    #[serde(default = "default_poisson_tol")]
    pub poisson_tol: f64,
    #[serde(default = "default_eig_rtol")]
    pub eig_rtol: f64,
    #[serde(default = "default_fpp_pairs")]
    pub fpp_pairs: usize,
    /// Block scales for the renormalised density.
    #[serde(default = "default_blocks")]
    pub renorm_blocks: Vec<u32>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    /// `d = 2`, `p = 0.7`, `n ∈ {6, 9, 12, 16, 21}`, seeds `0..5`.
    pub fn preset() -> Self {
        ExperimentConfig {
            d: 2,
            p: 0.7,
            n_list: vec![6, 9, 12, 16, 21],
            seeds: (0..5).collect(),
            quantities: default_quantities(),
            mode: default_mode(),
            resolution: None,
            poisson_tol: default_poisson_tol(),
            eig_rtol: default_eig_rtol(),
            fpp_pairs: default_fpp_pairs(),
            renorm_blocks: default_blocks(),
            out: default_out(),
            workers: default_workers(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.d == 0 {
            return fail("d must be positive".into());
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return fail(format!("p = {} is outside (0, 1]", self.p));
        }
        if self.n_list.is_empty() {
            return fail("n_list is empty".into());
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) || self.n_list[0] == 0 {
            return fail("n_list must be positive and strictly ascending".into());
        }
        if self.seeds.is_empty() {
            return fail("seed list is empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return fail("seed list has repeats".into());
        }
        if self.quantities.is_empty() {
            return fail("no quantities requested".into());
        }
        if let Some(r) = self.resolution {
            if !(r > 0.0) {
                return fail(format!("resolution {r} must be positive"));
            }
        }
        if !(self.poisson_tol > 0.0) || !(self.eig_rtol > 0.0) {
            return fail("tolerances must be positive".into());
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Instances in canonical order.
    pub fn instances(&self) -> Vec<(u32, u64)> {
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        self.n_list
            .iter()
            .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
    pub n_min: u32,
    pub n_max: u32,
    pub certification: Certification,
}

/// Outcome of fitting one row quantity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum FitOutcome {
    Fitted(FitSummary),
    Skipped { reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCounts {
    pub pass: usize,
    pub fail: usize,
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub config: ExperimentConfig,
    /// Rows in canonical order: by `(n, seed)`, then as produced.
    pub rows: Vec<Row>,
    pub fits: BTreeMap<String, FitOutcome>,
    pub checks: BTreeMap<String, CheckCounts>,
}

impl ScalingReport {
    /// Orders rows canonically and recomputes fits and check counts.
    pub fn from_rows(config: ExperimentConfig, mut rows: Vec<Row>) -> Self {
        // stable: rows of one instance keep their production order
        rows.sort_by_key(|r| (r.n, r.seed));
        let mut by_quantity: BTreeMap<String, Vec<&Row>> = BTreeMap::new();
        let mut checks: BTreeMap<String, CheckCounts> = BTreeMap::new();
        for r in &rows {
            if r.is_check() {
                let c = checks.entry(r.quantity.clone()).or_default();
                if r.certification == Certification::Error {
                    continue;
                }
                if r.value == 1.0 {
                    c.pass += 1;
                } else {
                    c.fail += 1;
                }
            } else {
                by_quantity.entry(r.quantity.clone()).or_default().push(r);
            }
        }
        let fits = by_quantity
            .into_iter()
            .map(|(q, rs)| (q, fit_rows(&rs)))
            .collect();
        ScalingReport {
            config,
            rows,
            fits,
            checks,
        }
    }

    pub fn error_rows(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.certification == Certification::Error)
            .count()
    }

    pub fn violations(&self) -> usize {
        self.checks.values().map(|c| c.fail).sum()
    }

    pub fn fit(&self, quantity: &str) -> Option<&FitSummary> {
        match self.fits.get(quantity)? {
            FitOutcome::Fitted(f) => Some(f),
            FitOutcome::Skipped { .. } => None,
        }
    }

    pub fn values(&self, quantity: &str) -> Vec<(u32, u64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.quantity == quantity && r.certification != Certification::Error)
            .map(|r| (r.n, r.seed, r.value))
            .collect()
    }
}

fn fit_rows(rows: &[&Row]) -> FitOutcome {
    let skip = |reason: &str| FitOutcome::Skipped { reason: reason.into() };
    let good: Vec<&&Row> = rows
        .iter()
        .filter(|r| r.certification != Certification::Error)
        .collect();
    let Some(first) = good.first() else {
        return skip("no usable rows");
    };
    let cert = first.certification;
    if good.iter().any(|r| r.certification != cert) {
        return skip("mixed certifications");
    }
    let points: Vec<(f64, f64)> = good.iter().map(|r| (r.n as f64, r.value)).collect();
    match fit_loglog(&points) {
        Ok(fit) => FitOutcome::Fitted(FitSummary {
            slope: fit.slope,
            intercept: fit.intercept,
            r2: fit.r2,
            points: fit.points,
            n_min: good.iter().map(|r| r.n).min().unwrap(),
            n_max: good.iter().map(|r| r.n).max().unwrap(),
            certification: cert,
        }),
        Err(e) => FitOutcome::Skipped { reason: e.to_string() },
    }
}

/// Least squares of `ln value` on `ln n`; repeated `n` enter as separate
/// points.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LinearFit> {
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| !(n > 0.0) || !(v > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs positive data, got ({n}, {v})")));
    }
    let distinct: BTreeSet<u64> = points.iter().map(|p| p.0.to_bits()).collect();
    if distinct.len() < 3 {
        return Err(Error::Domain(format!(
            "log-log fit needs at least 3 distinct sizes, got {}",
            distinct.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys)
}

/// Where and how a sweep records rows as instances finish.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Append-only journal of finished instances.
    pub journal: Option<PathBuf>,
    /// Skip instances already present in the journal.
    pub resume: bool,
    /// Stop after this many newly computed instances.
    pub max_instances: Option<usize>,
}

/// Runs every `(n, seed)` instance of the sweep.
pub fn run_scaling(config: &ExperimentConfig, opts: &RunOptions) -> Result<ScalingReport> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut done: BTreeSet<(u32, u64)> = BTreeSet::new();
    if let (Some(path), true) = (&opts.journal, opts.resume) {
        if path.exists() {
            for r in read_rows(path)? {
                if r.d != config.d || r.p != config.p {
                    return Err(Error::Validation(format!(
                        "journal {} belongs to d = {}, p = {}",
                        path.display(),
                        r.d,
                        r.p
                    )));
                }
                done.insert((r.n, r.seed));
                rows.push(r);
            }
        }
    }
    let mut journal = match &opts.journal {
        Some(path) => Some(open_journal(path, opts.resume)?),
        None => None,
    };
    let mut todo: Vec<(u32, u64)> = config
        .instances()
        .into_iter()
        .filter(|k| !done.contains(k))
        .collect();
    if let Some(limit) = opts.max_instances {
        todo.truncate(limit);
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<Vec<Row>>();
    let workers = config.workers.min(todo.len()).max(1);
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, todo) = (&next, &todo);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, seed)) = todo.get(i) else { break };
                if tx.send(analyze_instance(config, n, seed)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for batch in rx {
            if let Some(w) = journal.as_mut() {
                append_rows(w, &batch)?;
            }
            rows.extend(batch);
        }
        Ok(())
    })?;
    Ok(ScalingReport::from_rows(config.clone(), rows))
}

fn open_journal(path: &Path, resume: bool) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let fresh = !resume || !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = if fresh {
        File::create(path)?
    } else {
        // drop a partial last line left by an interrupted run
        let bytes = std::fs::read(path)?;
        let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let f = OpenOptions::new().append(true).open(path)?;
        f.set_len(keep as u64)?;
        f
    };
    let mut w = BufWriter::new(file);
    if fresh {
        report::write_header(&mut w)?;
        w.flush()?;
    }
    Ok(w)
}

fn append_rows<W: Write>(w: &mut W, rows: &[Row]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut cw = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        for r in rows {
            cw.serialize(r)?;
        }
        cw.flush()?;
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}
