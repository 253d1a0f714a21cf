//! Radial hedgehog profiles: the discrete energy and its derivatives, and the
//! two solvers (shooting and direct minimization).
//!
//! The energy of a profile `h` on `[0, R]` is
//!
//! ```text
//! I(h) = int_0^R ( r^2 h'^2 / 2 + 3 h^2 + r^2 g(h) ) dr
//! ```
//!
//! discretized with piecewise-linear `h`: the gradient term is integrated
//! exactly on each interval, the remaining terms by the trapezoidal rule.
//! [`discrete_gradient`] and [`second_variation`] are the exact first and
//! second derivatives of that sum.

mod minimize;
mod shooting;

pub use minimize::{minimize_energy, MinimizeOptions};
pub use shooting::{
    count_shooting_roots, default_handoff, find_shooting_param, find_shooting_param_with, shoot, shooting_sign,
    DenseSolution, Shot, ShootingOptions, ShootingResult, SCAN_A_MAX, SCAN_A_MIN,
};

use serde::{Deserialize, Serialize};

use crate::error::{HedgehogError, Result};
use crate::grid::RadialGrid;
use crate::potential::BulkPotential;

/// Which solver produced a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    Minimization,
    /// Read from a file or built by hand.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    /// Shooting seed `a = lim h / r^2`.
    pub seed: Option<f64>,
    /// Minimizer iterations.
    pub iterations: Option<usize>,
    /// Final projected gradient max-norm of the minimizer.
    pub gradient_norm: Option<f64>,
}

impl Provenance {
    pub fn external() -> Self {
        Self {
            method: Method::External,
            seed: None,
            iterations: None,
            gradient_norm: None,
        }
    }
}

/// Values `h` and derivative estimates `h1` at the grid nodes.
///
/// Construction only checks shapes and finiteness; `h[0] = 0` and
/// `h[N] = h_plus` are solver postconditions, checked by diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: RadialGrid,
    h: Vec<f64>,
    h1: Vec<f64>,
    meta: Provenance,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, h: Vec<f64>, h1: Vec<f64>, meta: Provenance) -> Result<Self> {
        if h.len() != grid.len() || h1.len() != grid.len() {
            return Err(HedgehogError::InvalidInput(format!(
                "profile has {} values and {} derivatives for {} nodes",
                h.len(),
                h1.len(),
                grid.len()
            )));
        }
        if h.iter().chain(&h1).any(|v| !v.is_finite()) {
            return Err(HedgehogError::InvalidInput("profile values must be finite".into()));
        }
        Ok(Self { grid, h, h1, meta })
    }

    /// Derivatives from [`finite_difference_slopes`].
    pub fn from_values(grid: RadialGrid, h: Vec<f64>, meta: Provenance) -> Result<Self> {
        if h.len() != grid.len() {
            return Err(HedgehogError::InvalidInput(format!(
                "profile has {} values for {} nodes",
                h.len(),
                grid.len()
            )));
        }
        let h1 = finite_difference_slopes(grid.nodes(), &h);
        Self::new(grid, h, h1, meta)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn r(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn h1(&self) -> &[f64] {
        &self.h1
    }

    pub fn meta(&self) -> &Provenance {
        &self.meta
    }

    pub fn radius(&self) -> f64 {
        self.grid.radius()
    }

    /// `h'(R)`.
    pub fn boundary_slope(&self) -> f64 {
        self.h1[self.h1.len() - 1]
    }

    /// Copy with `h'(R)` replaced.
    pub fn with_boundary_slope(&self, slope: f64) -> Self {
        let mut out = self.clone();
        let n = out.h1.len() - 1;
        out.h1[n] = slope;
        out
    }

    /// Max node-wise `|h - other.h|`.
    pub fn sup_distance(&self, other: &RadialProfile) -> Result<f64> {
        if self.grid != other.grid {
            return Err(HedgehogError::GridMismatch);
        }
        Ok(self.h.iter().zip(&other.h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// Second-order three-point slopes on a non-uniform grid, one-sided at the
/// ends.
pub fn finite_difference_slopes(r: &[f64], h: &[f64]) -> Vec<f64> {
    let n = r.len() - 1;
    let mut out = vec![0.0; n + 1];
    let three_point = |x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64, at: f64| {
        // derivative of the interpolating quadratic at `at`
        let l0 = (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let l1 = (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let l2 = (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1));
        l0 * y0 + l1 * y1 + l2 * y2
    };
    out[0] = three_point(r[0], r[1], r[2], h[0], h[1], h[2], r[0]);
    for i in 1..n {
        out[i] = three_point(r[i - 1], r[i], r[i + 1], h[i - 1], h[i], h[i + 1], r[i]);
    }
    out[n] = three_point(r[n - 2], r[n - 1], r[n], h[n - 2], h[n - 1], h[n], r[n]);
    out
}

/// Quadrature weights shared by the energy, its gradient and Hessian.
#[derive(Debug, Clone)]
pub(crate) struct Weights {
    /// `r_j^2`.
    pub r2: Vec<f64>,
    /// Per interval, `int r^2 dr / dr_i^2`.
    pub k: Vec<f64>,
    /// Trapezoidal node weights.
    pub m: Vec<f64>,
}

impl Weights {
    pub fn new(grid: &RadialGrid) -> Self {
        let r = grid.nodes();
        let n = r.len() - 1;
        let mut k = Vec::with_capacity(n);
        let mut m = vec![0.0; n + 1];
        for i in 0..n {
            let d = r[i + 1] - r[i];
            k.push((r[i + 1].powi(3) - r[i].powi(3)) / (3.0 * d * d));
            m[i] += 0.5 * d;
            m[i + 1] += 0.5 * d;
        }
        Self {
            r2: r.iter().map(|x| x * x).collect(),
            k,
            m,
        }
    }

    pub fn energy(&self, h: &[f64], pot: &BulkPotential) -> f64 {
        let grad: f64 = self
            .k
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let d = h[i + 1] - h[i];
                0.5 * k * d * d
            })
            .sum();
        let bulk: f64 = h
            .iter()
            .enumerate()
            .map(|(j, &v)| self.m[j] * (3.0 * v * v + self.r2[j] * pot.g(v)))
            .sum();
        grad + bulk
    }

    /// Derivative with respect to every node, endpoints included.
    pub fn gradient(&self, h: &[f64], pot: &BulkPotential) -> Vec<f64> {
        let mut out: Vec<f64> = h
            .iter()
            .enumerate()
            .map(|(j, &v)| self.m[j] * (6.0 * v + self.r2[j] * pot.g_prime(v)))
            .collect();
        for (i, k) in self.k.iter().enumerate() {
            let flux = k * (h[i + 1] - h[i]);
            out[i] -= flux;
            out[i + 1] += flux;
        }
        out
    }

    /// Diagonal of the Hessian; the off-diagonal entries are `-k`.
    pub fn hessian_diagonal(&self, h: &[f64], pot: &BulkPotential, convexify: bool) -> Vec<f64> {
        let mut diag: Vec<f64> = h
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let g2 = pot.g_second(v);
                let g2 = if convexify { g2.max(0.0) } else { g2 };
                self.m[j] * (6.0 + self.r2[j] * g2)
            })
            .collect();
        for (i, k) in self.k.iter().enumerate() {
            diag[i] += k;
            diag[i + 1] += k;
        }
        diag
    }

    pub fn quadratic_form(&self, h: &[f64], psi: &[f64], pot: &BulkPotential) -> f64 {
        let grad: f64 = self
            .k
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let d = psi[i + 1] - psi[i];
                k * d * d
            })
            .sum();
        let bulk: f64 = psi
            .iter()
            .enumerate()
            .map(|(j, &p)| self.m[j] * (6.0 + self.r2[j] * pot.g_second(h[j])) * p * p)
            .sum();
        grad + bulk
    }

    /// Trapezoidal `int r^2 f(h) dr`.
    pub fn weighted_integral(&self, h: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        h.iter().enumerate().map(|(j, &v)| self.m[j] * self.r2[j] * f(v)).sum()
    }
}

/// Discrete reduced energy.
pub fn energy(p: &RadialProfile, t: f64) -> Result<f64> {
    let pot = BulkPotential::new(t)?;
    Ok(Weights::new(&p.grid).energy(&p.h, &pot))
}

/// Derivative of [`energy`] with respect to the interior values
/// `h[1..N]`.
pub fn discrete_gradient(p: &RadialProfile, t: f64) -> Result<Vec<f64>> {
    let pot = BulkPotential::new(t)?;
    let mut g = Weights::new(&p.grid).gradient(&p.h, &pot);
    g.pop();
    g.remove(0);
    Ok(g)
}

/// Second derivative of [`energy`] at `p` in direction `psi`:
/// the quadrature of `r^2 (psi'^2 + 6 psi^2 / r^2 + g''(h) psi^2)`.
pub fn second_variation(p: &RadialProfile, psi: &[f64], t: f64) -> Result<f64> {
    if psi.len() != p.h.len() {
        return Err(HedgehogError::InvalidInput(format!(
            "test function has {} values for {} nodes",
            psi.len(),
            p.h.len()
        )));
    }
    if psi[psi.len() - 1] != 0.0 {
        return Err(HedgehogError::invalid("psi(R)", psi[psi.len() - 1], "test function must vanish at R"));
    }
    let pot = BulkPotential::new(t)?;
    Ok(Weights::new(&p.grid).quadratic_form(&p.h, psi, &pot))
}

/// `h''` from the Euler-Lagrange equation
/// `h'' + 2 h' / r - 6 h / r^2 = g'(h)`.
pub fn ode_rhs(r: f64, h: f64, h1: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(HedgehogError::invalid("r", r, "the equation is singular at r = 0"));
    }
    let gp = crate::potential::g_prime(h, t)?;
    Ok(gp - 2.0 * h1 / r + 6.0 * h / (r * r))
}
