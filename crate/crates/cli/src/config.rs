//! Run configuration: a JSON file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use hedgehog_core::potential::nondimensionalize;
use hedgehog_core::{GridSpec, MaterialParams, ReducedParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Solve,
    Sweep,
    Convert,
    Check,
}

/// Either reduced `(t, R)` directly or physical constants to rescale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    Reduced(ReducedParams),
    Material(MaterialParams),
}

impl Params {
    pub fn reduced(&self) -> hedgehog_core::Result<ReducedParams> {
        match self {
            Params::Reduced(p) => Ok(*p),
            Params::Material(m) => Ok(nondimensionalize(m)?.reduced()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Shooting endpoint and integrator tolerance.
    pub shoot: f64,
    /// Projected gradient max-norm for the minimizer.
    pub minimize: f64,
    /// Slack for bounds and monotonicity certificates.
    pub diagnostics: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            shoot: 1e-10,
            minimize: 1e-8,
            diagnostics: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub t_values: Vec<f64>,
    #[serde(rename = "R_values")]
    pub r_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub params: Option<Params>,
    pub grid_nodes: usize,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub sweep: Option<SweepSpec>,
    pub output_dir: Option<PathBuf>,
    pub emit_plots: bool,
    /// Random starts in the uniqueness probe.
    pub n_starts: usize,
    /// Seed for random starts and second-variation test functions.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            params: None,
            grid_nodes: 512,
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            sweep: None,
            output_dir: None,
            emit_plots: false,
            n_starts: 10,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Checks the invariants that do not depend on the mode.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.grid_nodes < hedgehog_core::grid::MIN_INTERVALS {
            bail!("grid_nodes = {} is below the minimum {}", self.grid_nodes, hedgehog_core::grid::MIN_INTERVALS);
        }
        let tol = &self.tolerances;
        for (name, v) in [("shoot", tol.shoot), ("minimize", tol.minimize), ("diagnostics", tol.diagnostics)] {
            if !(v.is_finite() && v > 0.0) {
                bail!("tolerance {name} = {v} must be positive");
            }
        }
        if self.mode == Some(Mode::Sweep) {
            match &self.sweep {
                Some(s) if !s.t_values.is_empty() && !s.r_values.is_empty() => {}
                _ => bail!("sweep needs non-empty t_values and R_values"),
            }
        }
        Ok(())
    }

    pub fn require_output_dir(&self) -> anyhow::Result<&Path> {
        match &self.output_dir {
            Some(p) => Ok(p),
            None => bail!("no output directory given (--out or output_dir)"),
        }
    }

    pub fn reduced_params(&self) -> anyhow::Result<ReducedParams> {
        match &self.params {
            Some(p) => Ok(p.reduced()?),
            None => bail!("no parameters given (--t/--R or params)"),
        }
    }
}
