use serde::{Deserialize, Serialize};

use crate::error::{HedgehogError, Result};

/// Minimum number of intervals on a radial grid.
pub const MIN_INTERVALS: usize = 16;

/// Grid family used to discretize `[0, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Uniform,
    /// Spacings grow geometrically; `ratio` is last spacing over first.
    Geometric { ratio: f64 },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Geometric { ratio: 4.0 }
    }
}

impl GridSpec {
    pub fn build(&self, radius: f64, intervals: usize) -> Result<RadialGrid> {
        match *self {
            GridSpec::Uniform => RadialGrid::uniform(radius, intervals),
            GridSpec::Geometric { ratio } => RadialGrid::geometric(radius, intervals, ratio),
        }
    }
}

/// Nodes `0 = r_0 < r_1 < ... < r_N = R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(radius: f64, intervals: usize) -> Result<Self> {
        check_radius(radius)?;
        check_intervals(intervals)?;
        let nodes = (0..=intervals)
            .map(|i| if i == intervals { radius } else { radius * i as f64 / intervals as f64 })
            .collect();
        Ok(Self { nodes })
    }

    pub fn geometric(radius: f64, intervals: usize, ratio: f64) -> Result<Self> {
        check_radius(radius)?;
        check_intervals(intervals)?;
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(HedgehogError::invalid("ratio", ratio, "must be positive and finite"));
        }
        if (ratio - 1.0).abs() < 1e-12 {
            return Self::uniform(radius, intervals);
        }
        let q = ratio.powf(1.0 / (intervals - 1) as f64);
        // partial sums of q^i, scaled to end at R
        let mut nodes = Vec::with_capacity(intervals + 1);
        let mut acc = 0.0;
        let mut step = 1.0;
        nodes.push(0.0);
        for _ in 0..intervals {
            acc += step;
            step *= q;
            nodes.push(acc);
        }
        let total = acc;
        for r in nodes.iter_mut() {
            *r *= radius / total;
        }
        nodes[intervals] = radius;
        Self::from_nodes(nodes)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_INTERVALS + 1 {
            return Err(HedgehogError::InvalidInput(format!(
                "grid needs at least {} intervals, got {}",
                MIN_INTERVALS,
                nodes.len().saturating_sub(1)
            )));
        }
        if nodes[0] != 0.0 {
            return Err(HedgehogError::invalid("r_0", nodes[0], "grid must start at 0"));
        }
        if nodes.iter().any(|r| !r.is_finite()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HedgehogError::InvalidInput("grid nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radius(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(HedgehogError::invalid("R", radius, "must be positive and finite"));
    }
    Ok(())
}

fn check_intervals(n: usize) -> Result<()> {
    if n < MIN_INTERVALS {
        return Err(HedgehogError::invalid("grid_nodes", n as f64, "need at least 16 intervals"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_nodes() {
        let g = RadialGrid::uniform(2.0, 16).unwrap();
        assert_eq!(g.len(), 17);
        assert_eq!(g.intervals(), 16);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.radius(), 2.0);
        assert_relative_eq!(g.nodes()[4], 0.5);
        assert_relative_eq!(g.max_spacing(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn geometric_spacing_ratio() {
        let g = RadialGrid::geometric(10.0, 64, 4.0).unwrap();
        let n = g.nodes();
        assert_eq!(g.radius(), 10.0);
        let first = n[1] - n[0];
        let last = n[64] - n[63];
        assert_relative_eq!(last / first, 4.0, max_relative = 1e-12);
        let q = (n[2] - n[1]) / first;
        assert_relative_eq!(q, 4f64.powf(1.0 / 63.0), max_relative = 1e-12);
        assert_eq!(RadialGrid::geometric(3.0, 20, 1.0).unwrap(), RadialGrid::uniform(3.0, 20).unwrap());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::uniform(1.0, 15).is_err());
        assert!(RadialGrid::uniform(0.0, 32).is_err());
        assert!(RadialGrid::uniform(f64::NAN, 32).is_err());
        assert!(RadialGrid::geometric(1.0, 32, 0.0).is_err());
        let mut v: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        assert!(RadialGrid::from_nodes(v.clone()).is_ok());
        v[3] = v[2];
        assert!(RadialGrid::from_nodes(v.clone()).is_err());
        v[0] = 0.1;
        assert!(RadialGrid::from_nodes(v).is_err());
    }

    #[test]
    fn default_spec_is_geometric() {
        let s = GridSpec::default();
        assert_eq!(s, GridSpec::Geometric { ratio: 4.0 });
        assert_eq!(s.build(5.0, 32).unwrap().intervals(), 32);
    }
}
