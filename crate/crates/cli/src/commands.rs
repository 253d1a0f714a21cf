//! The four subcommands. Each returns the process exit status; errors are
//! reported on stderr.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use chrono::Utc;
use hedgehog_core::diagnostics::{
    run_diagnostics, uniqueness_probe, DiagnosticsOptions, DiagnosticsReport, UniquenessOptions,
};
use hedgehog_core::potential::{h_plus, nondimensionalize};
use hedgehog_core::profile::{energy, find_shooting_param_with, minimize_energy, ShootingOptions};
use hedgehog_core::{HedgehogError, MaterialParams, RadialProfile, ReducedParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::io::{fmt_f64, profile_svg, read_profile_csv, sha256_file, write_profile_csv};

/// Exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Config = 1,
    Solver = 2,
    Diagnostics = 3,
    PartialSweep = 4,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// A failure and the status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: Status::Config,
            error: error.into(),
        }
    }

    fn solver(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: Status::Solver,
            error: error.into(),
        }
    }

    /// Parameter errors are the caller's fault, everything else the solver's.
    fn from_core(e: HedgehogError) -> Self {
        match e {
            HedgehogError::NoNematicState { .. }
            | HedgehogError::NotNematicGlobal { .. }
            | HedgehogError::InvalidParameter { .. }
            | HedgehogError::InvalidInput(_) => Self::config(e),
            _ => Self::solver(e),
        }
    }

    fn report(self) -> Status {
        eprintln!("error: {:#}", self.error);
        self.status
    }
}

/// Solved and certified case.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub t: f64,
    pub radius: f64,
    pub a_star: f64,
    /// Discrete energy of the minimizer.
    pub i_min: f64,
    pub profile: RadialProfile,
    pub report: DiagnosticsReport,
}

pub fn diagnostics_options(cfg: &RunConfig) -> DiagnosticsOptions {
    DiagnosticsOptions {
        tol: cfg.tolerances.diagnostics,
        seed: cfg.seed,
        ..Default::default()
    }
}

/// Shooting, minimization, certificates and the uniqueness probe for one
/// `(t, R)`.
pub fn solve_case(t: f64, radius: f64, cfg: &RunConfig) -> Result<CaseResult, Failure> {
    let params = ReducedParams::new(t, radius).map_err(Failure::from_core)?;
    params.require_nematic_global("solve").map_err(Failure::from_core)?;
    let tol = &cfg.tolerances;
    let so = ShootingOptions {
        rk_tol: tol.shoot,
        handoff_r: None,
        grid: cfg.grid,
        grid_nodes: cfg.grid_nodes,
    };
    let shot = find_shooting_param_with(t, radius, tol.shoot, &so).map_err(Failure::from_core)?;
    let grid = shot.profile.grid().clone();
    let min = minimize_energy(t, radius, &grid, None, tol.minimize, 500).map_err(Failure::from_core)?;
    let i_min = energy(&min, t).map_err(Failure::from_core)?;
    let mut report = run_diagnostics(&shot.profile, t, &diagnostics_options(cfg)).map_err(Failure::from_core)?;
    let uo = UniquenessOptions {
        grid: cfg.grid,
        grid_nodes: cfg.grid_nodes,
        minimize_tol: tol.minimize,
        rk_tol: tol.shoot,
        shoot_tol: tol.shoot,
        ..Default::default()
    };
    report.uniqueness =
        Some(uniqueness_probe(t, radius, cfg.n_starts, cfg.seed, &uo, Some(&shot.profile)).map_err(Failure::from_core)?);
    Ok(CaseResult {
        t,
        radius,
        a_star: shot.a_star,
        i_min,
        profile: shot.profile,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseStatus {
    pub t: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    /// Relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub started: String,
    pub finished: String,
    pub cases: Vec<CaseStatus>,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST: &str = "manifest.json";

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Writes the manifest listing `files` (relative names inside `dir`).
fn write_manifest(
    dir: &Path,
    cfg: &RunConfig,
    started: String,
    cases: Vec<CaseStatus>,
    mut files: Vec<String>,
) -> anyhow::Result<()> {
    files.sort();
    let files = files
        .into_iter()
        .map(|name| {
            let path = dir.join(&name);
            Ok(FileEntry {
                bytes: std::fs::metadata(&path)?.len(),
                sha256: sha256_file(&path)?,
                path: name,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let manifest = RunManifest {
        tool: "hedgehog",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        started,
        finished: timestamp(),
        cases,
        files,
    };
    write_json(&dir.join(MANIFEST), &manifest)
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Profile CSV, diagnostics JSON and optionally an SVG, named `{prefix}...`.
fn write_case(dir: &Path, prefix: &str, case: &CaseResult, plots: bool) -> anyhow::Result<Vec<String>> {
    let mut names = vec![format!("{prefix}profile.csv"), format!("{prefix}diagnostics.json")];
    write_profile_csv(&dir.join(&names[0]), &case.profile, case.t)?;
    write_json(&dir.join(&names[1]), &case.report)?;
    if plots {
        let name = format!("{prefix}profile.svg");
        let title = format!("t = {}, R = {}", case.t, case.radius);
        std::fs::write(dir.join(&name), profile_svg(&case.profile, h_plus(case.t)?, &title))?;
        names.push(name);
    }
    Ok(names)
}

fn prepare_output(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.require_output_dir().map_err(Failure::config)?.to_path_buf();
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::config)?;
    Ok(dir)
}

pub fn cmd_solve(cfg: &RunConfig) -> Status {
    match solve(cfg) {
        Ok(s) => s,
        Err(f) => f.report(),
    }
}

fn solve(cfg: &RunConfig) -> Result<Status, Failure> {
    let started = timestamp();
    cfg.validate().map_err(Failure::config)?;
    let params = cfg.reduced_params().map_err(Failure::config)?;
    let dir = prepare_output(cfg)?;
    let result = solve_case(params.t, params.radius, cfg);
    let (status, files) = match &result {
        Ok(case) => {
            let files = write_case(&dir, "", case, cfg.emit_plots).map_err(Failure::config)?;
            let status = if case.report.certified() { "ok" } else { "not certified" };
            (status.to_string(), files)
        }
        Err(f) => (format!("error: {:#}", f.error), Vec::new()),
    };
    let cases = vec![CaseStatus {
        t: params.t,
        radius: params.radius,
        status,
    }];
    write_manifest(&dir, cfg, started, cases, files).map_err(Failure::config)?;
    let case = result?;
    println!(
        "t = {} R = {}: a* = {} I = {} h'(R) = {} certified = {}",
        case.t,
        case.radius,
        case.a_star,
        case.i_min,
        case.profile.boundary_slope(),
        case.report.certified()
    );
    Ok(if case.report.certified() {
        Status::Success
    } else {
        eprintln!("diagnostics failed: {}", serde_json::to_string(&case.report).unwrap_or_default());
        Status::Diagnostics
    })
}

pub const SUMMARY: &str = "summary.csv";
pub const SUMMARY_HEADER: [&str; 9] = [
    "t",
    "R",
    "a_star",
    "I_min",
    "h1_at_R",
    "pohozaev_residual",
    "monotone_ok",
    "unique_ok",
    "status",
];

/// Worker count from `HEDGEHOG_WORKERS`, else the number of logical CPUs.
pub fn worker_count() -> anyhow::Result<usize> {
    match std::env::var("HEDGEHOG_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(anyhow!("HEDGEHOG_WORKERS = {v:?} is not a positive integer")),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Sorted, deduplicated Cartesian product of the sweep lists.
pub fn sweep_cases(t_values: &[f64], r_values: &[f64]) -> Vec<(f64, f64)> {
    let mut cases: Vec<(f64, f64)> = t_values
        .iter()
        .flat_map(|&t| r_values.iter().map(move |&r| (t, r)))
        .collect();
    cases.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cases.dedup();
    cases
}

fn summary_row(t: f64, radius: f64, result: &Result<CaseResult, Failure>) -> Vec<String> {
    let mut row = vec![fmt_f64(t), fmt_f64(radius)];
    match result {
        Ok(c) => {
            let unique = match c.report.uniqueness.as_ref().and_then(|u| u.verdict) {
                Some(v) => v.to_string(),
                None => String::new(),
            };
            row.extend([
                fmt_f64(c.a_star),
                fmt_f64(c.i_min),
                fmt_f64(c.profile.boundary_slope()),
                fmt_f64(c.report.pohozaev_residual),
                c.report.monotone_ok.to_string(),
                unique,
                if c.report.certified() { "ok" } else { "not certified" }.to_string(),
            ]);
        }
        Err(f) => {
            row.extend(std::iter::repeat_n(String::new(), 6));
            row.push(format!("error: {:#}", f.error));
        }
    }
    row
}

pub fn cmd_sweep(cfg: &RunConfig) -> Status {
    match sweep(cfg) {
        Ok(s) => s,
        Err(f) => f.report(),
    }
}

fn sweep(cfg: &RunConfig) -> Result<Status, Failure> {
    let started = timestamp();
    cfg.validate().map_err(Failure::config)?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Failure::config(anyhow!("sweep needs t_values and R_values")))?;
    if spec.t_values.is_empty() || spec.r_values.is_empty() {
        return Err(Failure::config(anyhow!("sweep needs non-empty t_values and R_values")));
    }
    let workers = worker_count().map_err(Failure::config)?;
    let dir = prepare_output(cfg)?;
    let cases = sweep_cases(&spec.t_values, &spec.r_values);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(Failure::config)?;
    // results come back in case order whatever the scheduling
    let results: Vec<Result<CaseResult, Failure>> =
        pool.install(|| cases.par_iter().map(|&(t, r)| solve_case(t, r, cfg)).collect());

    let mut files = Vec::new();
    let mut statuses = Vec::new();
    let mut failed = 0;
    let mut w = csv::Writer::from_path(dir.join(SUMMARY))
        .with_context(|| format!("creating {}", dir.join(SUMMARY).display()))
        .map_err(Failure::config)?;
    w.write_record(SUMMARY_HEADER).map_err(Failure::config)?;
    for (&(t, radius), result) in cases.iter().zip(&results) {
        let row = summary_row(t, radius, result);
        w.write_record(&row).map_err(Failure::config)?;
        let ok = matches!(result, Ok(c) if c.report.certified());
        if !ok {
            failed += 1;
        }
        if let Ok(case) = result {
            let prefix = format!("t{t}_R{radius}_");
            files.extend(write_case(&dir, &prefix, case, cfg.emit_plots).map_err(Failure::config)?);
        }
        statuses.push(CaseStatus {
            t,
            radius,
            status: row[8].clone(),
        });
    }
    w.flush().map_err(Failure::config)?;
    files.push(SUMMARY.to_string());
    write_manifest(&dir, cfg, started, statuses, files).map_err(Failure::config)?;
    println!("{} cases, {} failed; summary in {}", cases.len(), failed, dir.join(SUMMARY).display());
    Ok(if failed == 0 { Status::Success } else { Status::PartialSweep })
}

pub fn cmd_convert(cfg: &RunConfig, material: &Path) -> Status {
    match convert(cfg, material) {
        Ok(s) => s,
        Err(f) => f.report(),
    }
}

fn convert(cfg: &RunConfig, material: &Path) -> Result<Status, Failure> {
    let text = std::fs::read_to_string(material)
        .with_context(|| format!("reading {}", material.display()))
        .map_err(Failure::config)?;
    let params: MaterialParams = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", material.display()))
        .map_err(Failure::config)?;
    let result = nondimensionalize(&params).map_err(Failure::config)?;
    let json = serde_json::to_string_pretty(&result).map_err(Failure::config)?;
    println!("{json}");
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(Failure::config)?;
        write_json(&dir.join("convert.json"), &result).map_err(Failure::config)?;
    }
    Ok(Status::Success)
}

pub fn cmd_check(cfg: &RunConfig, profile_csv: &Path) -> Status {
    match check(cfg, profile_csv) {
        Ok(s) => s,
        Err(f) => f.report(),
    }
}

/// Re-runs the profile-level certificates on a stored profile.
pub fn check_report(cfg: &RunConfig, profile_csv: &Path) -> Result<DiagnosticsReport, Failure> {
    cfg.validate().map_err(Failure::config)?;
    let t = match &cfg.params {
        Some(p) => p.reduced().map_err(Failure::config)?.t,
        None => return Err(Failure::config(anyhow!("check needs the reduced temperature (--t)"))),
    };
    let profile = read_profile_csv(profile_csv).map_err(Failure::config)?;
    run_diagnostics(&profile, t, &diagnostics_options(cfg)).map_err(Failure::from_core)
}

fn check(cfg: &RunConfig, profile_csv: &Path) -> Result<Status, Failure> {
    let report = check_report(cfg, profile_csv)?;
    let json = serde_json::to_string_pretty(&report).map_err(Failure::config)?;
    println!("{json}");
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(Failure::config)?;
        write_json(&dir.join("check.json"), &report).map_err(Failure::config)?;
    }
    Ok(if report.profile_certified() {
        Status::Success
    } else {
        Status::Diagnostics
    })
}
