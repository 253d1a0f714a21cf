//! Command-line arguments and their merge onto a [`RunConfig`].

use std::path::PathBuf;

use anyhow::bail;
use clap::{Args, Parser, Subcommand, ValueEnum};
use hedgehog_core::{GridSpec, ReducedParams};

use crate::config::{Mode, Params, RunConfig, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "hedgehog", version, about = "Radial hedgehog profiles of nematic droplets")]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one (t, R) case and certify it.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long = "R")]
        radius: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the Cartesian product of t and R values.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long = "t-list", value_delimiter = ',', allow_hyphen_values = true)]
        t_list: Option<Vec<f64>>,
        #[arg(long = "R-list", value_delimiter = ',', allow_hyphen_values = true)]
        r_list: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Rescale physical material constants to reduced parameters.
    Convert {
        #[arg(long)]
        material: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-certify a stored profile CSV.
    #[command(allow_negative_numbers = true)]
    Check {
        #[arg(long)]
        profile: PathBuf,
        /// Reduced temperature the profile was solved at.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Uniform,
    Geometric,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Grid intervals.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    /// Last-to-first spacing ratio of the geometric grid.
    #[arg(long)]
    pub grid_ratio: Option<f64>,
    /// Write an SVG plot per case.
    #[arg(long)]
    pub plots: bool,
    /// Random starts in the uniqueness probe.
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) -> anyhow::Result<()> {
        if let Some(n) = self.nodes {
            cfg.grid_nodes = n;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = Some(out.clone());
        }
        let ratio = self.grid_ratio.or(match cfg.grid {
            GridSpec::Geometric { ratio } => Some(ratio),
            GridSpec::Uniform => None,
        });
        match (self.grid, ratio) {
            (Some(GridKind::Uniform), _) => cfg.grid = GridSpec::Uniform,
            (Some(GridKind::Geometric), r) => cfg.grid = GridSpec::Geometric { ratio: r.unwrap_or(4.0) },
            (None, Some(r)) if self.grid_ratio.is_some() => {
                if cfg.grid == GridSpec::Uniform {
                    bail!("--grid-ratio needs a geometric grid");
                }
                cfg.grid = GridSpec::Geometric { ratio: r }
            }
            _ => {}
        }
        if self.plots {
            cfg.emit_plots = true;
        }
        if let Some(s) = self.starts {
            cfg.n_starts = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(())
    }
}

/// Overrides `t` and/or `R` of the configured reduced parameters.
fn override_params(cfg: &mut RunConfig, t: Option<f64>, radius: Option<f64>) -> anyhow::Result<()> {
    if t.is_none() && radius.is_none() {
        return Ok(());
    }
    let base = match &cfg.params {
        Some(p) => Some(p.reduced()?),
        None => None,
    };
    let t = t.or(base.map(|b| b.t));
    let radius = radius.or(base.map(|b| b.radius));
    cfg.params = match (t, radius) {
        (Some(t), Some(radius)) => Some(Params::Reduced(ReducedParams { t, radius })),
        (Some(t), None) => Some(Params::Reduced(ReducedParams { t, radius: f64::NAN })),
        _ => bail!("--R given without --t"),
    };
    Ok(())
}

impl Cli {
    /// The effective configuration: file values, then flags.
    pub fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        match &self.command {
            Command::Solve { t, radius, common } => {
                cfg.mode = Some(Mode::Solve);
                override_params(&mut cfg, *t, *radius)?;
                common.apply(&mut cfg)?;
            }
            Command::Sweep { t_list, r_list, common } => {
                cfg.mode = Some(Mode::Sweep);
                let mut spec = cfg.sweep.take().unwrap_or(SweepSpec {
                    t_values: Vec::new(),
                    r_values: Vec::new(),
                });
                if let Some(v) = t_list {
                    spec.t_values = v.clone();
                }
                if let Some(v) = r_list {
                    spec.r_values = v.clone();
                }
                cfg.sweep = Some(spec);
                common.apply(&mut cfg)?;
            }
            Command::Convert { out, .. } => {
                cfg.mode = Some(Mode::Convert);
                if let Some(out) = out {
                    cfg.output_dir = Some(out.clone());
                }
            }
            Command::Check { t, out, .. } => {
                cfg.mode = Some(Mode::Check);
                override_params(&mut cfg, *t, None)?;
                if let Some(out) = out {
                    cfg.output_dir = Some(out.clone());
                }
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("hedgehog").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn solve_flags() {
        let cfg = parse(&["solve", "--t", "-8", "--R", "10", "--nodes", "256", "--out", "x"]).config().unwrap();
        assert_eq!(cfg.params, Some(Params::Reduced(ReducedParams { t: -8.0, radius: 10.0 })));
        assert_eq!(cfg.grid_nodes, 256);
        assert_eq!(cfg.output_dir, Some(PathBuf::from("x")));
        assert_eq!(cfg.mode, Some(Mode::Solve));
    }

    #[test]
    fn sweep_lists() {
        let cfg = parse(&["sweep", "--t-list", "-10,-1,-0.1", "--R-list", "1,5,20"]).config().unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.t_values, vec![-10.0, -1.0, -0.1]);
        assert_eq!(s.r_values, vec![1.0, 5.0, 20.0]);
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"params": {"t": -1, "R": 5}, "grid_nodes": 128, "grid": {"kind": "uniform"}, "output_dir": "a"}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let cfg = parse(&["--config", p, "solve", "--R", "7"]).config().unwrap();
        assert_eq!(cfg.params, Some(Params::Reduced(ReducedParams { t: -1.0, radius: 7.0 })));
        assert_eq!(cfg.grid_nodes, 128);
        assert_eq!(cfg.grid, GridSpec::Uniform);
        assert_eq!(cfg.output_dir, Some(PathBuf::from("a")));
        let cfg = parse(&["--config", p, "solve", "--grid", "geometric", "--out", "b"]).config().unwrap();
        assert_eq!(cfg.grid, GridSpec::Geometric { ratio: 4.0 });
        assert_eq!(cfg.output_dir, Some(PathBuf::from("b")));
        assert!(parse(&["--config", p, "solve", "--grid-ratio", "2"]).config().is_err());
    }

    #[test]
    fn check_takes_t() {
        let cfg = parse(&["check", "--profile", "p.csv", "--t", "-0.5"]).config().unwrap();
        assert_eq!(cfg.params.unwrap().reduced().unwrap().t, -0.5);
    }
}
