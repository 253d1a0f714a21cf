//! Projected Newton descent on the discrete energy.
//!
//! The Hessian of the discrete energy is tridiagonal. Each step solves it on
//! the free nodes, falling back to the convexified Hessian (`g''` clipped at
//! zero, diagonally dominant) when the true one is indefinite. Steps are
//! projected onto `[0, h_plus]` and backtracked until the Armijo condition
//! holds.

use crate::error::{HedgehogError, Result};
use crate::grid::RadialGrid;
use crate::potential::{BulkPotential, ReducedParams};

use super::{finite_difference_slopes, Method, Provenance, RadialProfile, Weights};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 500,
        }
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;

/// Minimizes the discrete energy over profiles with `h[0] = 0`,
/// `h[N] = h_plus` and `0 <= h <= h_plus`, until the projected gradient
/// max-norm is at most `tol`.
///
/// Without `init` the iteration starts from `h_plus (r / R)^2`.
pub fn minimize_energy(
    t: f64,
    radius: f64,
    grid: &RadialGrid,
    init: Option<&RadialProfile>,
    tol: f64,
    max_iters: usize,
) -> Result<RadialProfile> {
    ReducedParams::new(t, radius)?.require_nematic_global("minimize_energy")?;
    if (grid.radius() - radius).abs() > 1e-12 * radius {
        return Err(HedgehogError::invalid("R", radius, "grid does not end at R"));
    }
    if !(tol > 0.0) {
        return Err(HedgehogError::invalid("tol", tol, "must be positive"));
    }
    let pot = BulkPotential::new(t)?;
    let hp = pot.h_plus();
    let n = grid.intervals();
    let w = Weights::new(grid);

    let mut h: Vec<f64> = match init {
        Some(p) => {
            if p.grid() != grid {
                return Err(HedgehogError::GridMismatch);
            }
            p.h().iter().map(|v| v.clamp(0.0, hp)).collect()
        }
        None => grid.nodes().iter().map(|r| hp * (r / radius).powi(2)).collect(),
    };
    h[0] = 0.0;
    h[n] = hp;

    let free_mask = |h: &[f64], g: &[f64]| -> Vec<bool> {
        (0..=n)
            .map(|j| j > 0 && j < n && !(h[j] <= 0.0 && g[j] > 0.0) && !(h[j] >= hp && g[j] < 0.0))
            .collect()
    };
    let projected_norm = |h: &[f64], g: &[f64]| -> f64 {
        let free = free_mask(h, g);
        (1..n).filter(|&j| free[j]).map(|j| g[j].abs()).fold(0.0, f64::max)
    };

    let mut energy = w.energy(&h, &pot);
    let mut grad = w.gradient(&h, &pot);
    let mut gnorm = projected_norm(&h, &grad);
    let mut iterations = 0;
    while gnorm > tol {
        if iterations >= max_iters {
            return Err(HedgehogError::NonConvergence {
                solver: "minimize_energy",
                iterations,
                residual: gnorm,
            });
        }
        iterations += 1;
        let free = free_mask(&h, &grad);
        let newton = solve_tridiagonal(&w, &h, &grad, &free, &pot, false)
            .filter(|d| (0..=n).map(|j| d[j] * grad[j]).sum::<f64>() < 0.0);
        let dir = match newton {
            Some(d) => d,
            None => solve_tridiagonal(&w, &h, &grad, &free, &pot, true)
                .expect("convexified Hessian is diagonally dominant"),
        };

        let trial = |alpha: f64| -> Vec<f64> {
            h.iter()
                .zip(&dir)
                .map(|(v, d)| (v + alpha * d).clamp(0.0, hp))
                .collect()
        };
        let mut accepted = None;
        let mut alpha = 1.0;
        // below this the energy comparison is rounding noise
        let noise = 64.0 * f64::EPSILON * (1.0 + energy.abs());
        let full: f64 = (0..=n).map(|j| grad[j] * dir[j]).sum();
        let backtracks = if full.abs() > noise { MAX_BACKTRACKS } else { 0 };
        for _ in 0..backtracks {
            let cand = trial(alpha);
            let e = w.energy(&cand, &pot);
            let decrease: f64 = (0..=n).map(|j| grad[j] * (cand[j] - h[j])).sum();
            if e <= energy + ARMIJO * decrease {
                accepted = Some((cand, e));
                break;
            }
            alpha *= 0.5;
        }
        // near the minimum energy differences drown in rounding; accept a
        // full step only if it shrinks the gradient
        if accepted.is_none() {
            let cand = trial(1.0);
            let g = w.gradient(&cand, &pot);
            if projected_norm(&cand, &g) < gnorm {
                let e = w.energy(&cand, &pot);
                accepted = Some((cand, e));
            }
        }
        let Some((cand, e)) = accepted else {
            return Err(HedgehogError::NonConvergence {
                solver: "minimize_energy (line search)",
                iterations,
                residual: gnorm,
            });
        };
        h = cand;
        energy = e;
        grad = w.gradient(&h, &pot);
        gnorm = projected_norm(&h, &grad);
    }

    let mut h1 = finite_difference_slopes(grid.nodes(), &h);
    // dE/dh_N approximates R^2 h'(R) at a discrete critical point
    h1[n] = w.gradient(&h, &pot)[n] / (radius * radius);
    RadialProfile::new(
        grid.clone(),
        h,
        h1,
        Provenance {
            method: Method::Minimization,
            seed: None,
            iterations: Some(iterations),
            gradient_norm: Some(gnorm),
        },
    )
}

/// Newton direction `-H^{-1} g` on the free nodes, zero elsewhere. `None`
/// when the reduced Hessian is not positive definite.
fn solve_tridiagonal(
    w: &Weights,
    h: &[f64],
    grad: &[f64],
    free: &[bool],
    pot: &BulkPotential,
    convexify: bool,
) -> Option<Vec<f64>> {
    let len = h.len();
    let diag = w.hessian_diagonal(h, pot, convexify);
    // Thomas elimination; fixed nodes decouple with zero direction
    let mut c_prime = vec![0.0; len];
    let mut d_prime = vec![0.0; len];
    for j in 0..len {
        if !free[j] {
            c_prime[j] = 0.0;
            d_prime[j] = 0.0;
            continue;
        }
        let lower = if j > 0 && free[j - 1] { -w.k[j - 1] } else { 0.0 };
        let upper = if j + 1 < len && free[j + 1] { -w.k[j] } else { 0.0 };
        let pivot = diag[j] - lower * c_prime.get(j.wrapping_sub(1)).copied().unwrap_or(0.0);
        if !(pivot > 0.0) {
            return None;
        }
        c_prime[j] = upper / pivot;
        let prev = if j > 0 { d_prime[j - 1] } else { 0.0 };
        d_prime[j] = (-grad[j] - lower * prev) / pivot;
    }
    let mut x = vec![0.0; len];
    for j in (0..len).rev() {
        if !free[j] {
            continue;
        }
        let next = if j + 1 < len { x[j + 1] } else { 0.0 };
        x[j] = d_prime[j] - c_prime[j] * next;
    }
    Some(x)
}
