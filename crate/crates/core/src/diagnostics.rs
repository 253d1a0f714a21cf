//! Numerical certificates for computed profiles.
//!
//! Profile-level checks depend only on the sampled `(r, h, h')` data, so a
//! profile written to disk and read back yields the same report. The
//! uniqueness probe re-solves the problem and is attached separately.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{HedgehogError, Result};
use crate::grid::{GridSpec, RadialGrid};
use crate::potential::{BulkPotential, ReducedParams};
use crate::profile::{
    count_shooting_roots, find_shooting_param_with, minimize_energy, second_variation, Provenance, RadialProfile,
    ShootingOptions, Weights,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub ok: bool,
    /// Largest excursion outside `[0, h_plus]`, zero when inside.
    pub max_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub ok: bool,
    /// Smallest forward difference quotient beyond the first interval.
    pub min_slope: f64,
}

/// `-tol <= h <= h_plus + tol` at every node.
pub fn check_bounds(p: &RadialProfile, t: f64, tol: f64) -> Result<BoundsCheck> {
    let hp = BulkPotential::new(t)?.h_plus();
    let max_violation = p
        .h()
        .iter()
        .map(|&v| (-v).max(v - hp).max(0.0))
        .fold(0.0, f64::max);
    Ok(BoundsCheck {
        ok: max_violation <= tol,
        max_violation,
    })
}

/// Every forward difference quotient exceeds `-tol`, and those beyond the
/// first interval are strictly positive.
pub fn check_monotone(p: &RadialProfile, tol: f64) -> MonotoneCheck {
    let (r, h) = (p.r(), p.h());
    let slopes: Vec<f64> = (0..h.len() - 1).map(|i| (h[i + 1] - h[i]) / (r[i + 1] - r[i])).collect();
    let min_slope = slopes[1..].iter().copied().fold(f64::INFINITY, f64::min);
    MonotoneCheck {
        ok: slopes[0] > -tol && min_slope > 0.0,
        min_slope,
    }
}

/// Left and right sides of the radial Pohozaev identity
/// `I(h) + 2 int r^2 g(h) dr = 3 R h_plus^2 - R^3 h'(R)^2 / 2`, using the
/// profile's own `h'(R)`.
pub fn pohozaev_sides(p: &RadialProfile, t: f64) -> Result<(f64, f64)> {
    let pot = BulkPotential::new(t)?;
    let w = Weights::new(p.grid());
    let lhs = w.energy(p.h(), &pot) + 2.0 * w.weighted_integral(p.h(), |v| pot.g(v));
    let radius = p.radius();
    let slope = p.boundary_slope();
    let rhs = 3.0 * radius * pot.h_plus().powi(2) - 0.5 * radius.powi(3) * slope * slope;
    Ok((lhs, rhs))
}

pub fn pohozaev_residual(p: &RadialProfile, t: f64) -> Result<f64> {
    let (lhs, rhs) = pohozaev_sides(p, t)?;
    Ok((lhs - rhs).abs())
}

/// `(8 pi int r^2 (g(h1) - g(h2)) dr, 2 pi R^3 (h2'(R)^2 - h1'(R)^2))`.
pub fn difference_identity_sides(p1: &RadialProfile, p2: &RadialProfile, t: f64) -> Result<(f64, f64)> {
    if p1.grid() != p2.grid() {
        return Err(HedgehogError::GridMismatch);
    }
    let pot = BulkPotential::new(t)?;
    let w = Weights::new(p1.grid());
    let bulk: f64 = p1
        .h()
        .iter()
        .zip(p2.h())
        .enumerate()
        .map(|(j, (a, b))| w.m[j] * w.r2[j] * (pot.g(*a) - pot.g(*b)))
        .sum();
    let (s1, s2) = (p1.boundary_slope(), p2.boundary_slope());
    Ok((8.0 * PI * bulk, 2.0 * PI * p1.radius().powi(3) * (s2 * s2 - s1 * s1)))
}

pub fn difference_identity_residual(p1: &RadialProfile, p2: &RadialProfile, t: f64) -> Result<f64> {
    let (lhs, rhs) = difference_identity_sides(p1, p2, t)?;
    Ok((lhs - rhs).abs())
}

/// Residual of `h'' + 2 h' / r - 6 h / r^2 - g'(h)` at interior nodes, with
/// three-point derivatives.
pub fn ode_residual(p: &RadialProfile, t: f64) -> Result<Vec<f64>> {
    let pot = BulkPotential::new(t)?;
    Ok(ode_residual_with(p, |h| pot.g_prime(h)))
}

/// [`ode_residual`] with an arbitrary right-hand side `g'`.
pub fn ode_residual_with(p: &RadialProfile, g_prime: impl Fn(f64) -> f64) -> Vec<f64> {
    let (r, h) = (p.r(), p.h());
    (1..h.len() - 1)
        .map(|i| {
            let (dm, dp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
            let (sm, sp) = ((h[i] - h[i - 1]) / dm, (h[i + 1] - h[i]) / dp);
            let h2 = 2.0 * (sp - sm) / (dm + dp);
            let h1 = (dm * sp + dp * sm) / (dm + dp);
            h2 + 2.0 * h1 / r[i] - 6.0 * h[i] / (r[i] * r[i]) - g_prime(h[i])
        })
        .collect()
}

/// Random test functions vanishing at `R`: tents and smooth bumps with
/// random centers and widths, normalized to unit trapezoidal L2 norm.
pub fn random_test_functions(grid: &RadialGrid, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = grid.nodes();
    let radius = grid.radius();
    let min_width = 2.0 * grid.max_spacing();
    let weights = Weights::new(grid);
    (0..count)
        .map(|i| {
            let center = rng.gen_range(0.0..radius);
            let width = (rng.gen_range(min_width.ln()..(0.5 * radius).max(min_width * 1.01).ln())).exp();
            let mut psi: Vec<f64> = r
                .iter()
                .map(|&x| {
                    let s = (x - center) / width;
                    if i % 2 == 0 {
                        (1.0 - s.abs()).max(0.0)
                    } else if s.abs() < 1.0 {
                        (-1.0 / (1.0 - s * s)).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let last = psi.len() - 1;
            psi[last] = 0.0;
            let norm = psi
                .iter()
                .zip(&weights.m)
                .map(|(v, m)| m * v * v)
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                psi.iter_mut().for_each(|v| *v /= norm);
            }
            psi
        })
        .collect()
}

/// Minimum of the second variation over [`random_test_functions`].
pub fn second_variation_min(p: &RadialProfile, t: f64, count: usize, seed: u64) -> Result<f64> {
    let mut min = f64::INFINITY;
    for psi in random_test_functions(p.grid(), count, seed) {
        min = min.min(second_variation(p, &psi, t)?);
    }
    Ok(min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessOptions {
    pub grid: GridSpec,
    pub grid_nodes: usize,
    pub minimize_tol: f64,
    pub max_iters: usize,
    pub rk_tol: f64,
    pub shoot_tol: f64,
    /// Seeds in the logarithmic root scan.
    pub scan_samples: usize,
}

impl Default for UniquenessOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            grid_nodes: 512,
            minimize_tol: 1e-8,
            max_iters: 500,
            rk_tol: 1e-10,
            shoot_tol: 1e-10,
            scan_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRecord {
    pub n_starts: usize,
    pub n_failed: usize,
    pub max_pairwise_profile_distance: f64,
    pub shooting_root_count: usize,
    /// Distance below which profiles count as the same solution.
    pub threshold: f64,
    /// Only asserted for `t < 0`.
    pub verdict: Option<bool>,
}

/// Random admissible start: `h_plus (r/R)^p + A sin(k pi r / R)` clamped to
/// `[0, h_plus]`, with fixed endpoints.
pub fn random_start(grid: &RadialGrid, h_plus: f64, rng: &mut impl Rng) -> Vec<f64> {
    let radius = grid.radius();
    let power = rng.gen_range(0.5..4.0);
    let amplitude = rng.gen_range(-0.5..0.5) * h_plus;
    let k = rng.gen_range(1..=8) as f64;
    let n = grid.intervals();
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            if j == 0 {
                0.0
            } else if j == n {
                h_plus
            } else {
                let x = r / radius;
                (h_plus * x.powf(power) + amplitude * (k * PI * x).sin()).clamp(0.0, h_plus)
            }
        })
        .collect()
}

/// Minimizes from `n_starts` random starts and compares the results with
/// the shooting solution. Deterministic in `(seed, n_starts)`.
///
/// `reference` reuses an already computed shooting profile on the probe grid.
pub fn uniqueness_probe(
    t: f64,
    radius: f64,
    n_starts: usize,
    seed: u64,
    opts: &UniquenessOptions,
    reference: Option<&RadialProfile>,
) -> Result<UniquenessRecord> {
    ReducedParams::new(t, radius)?.require_nematic_global("uniqueness_probe")?;
    let grid = opts.grid.build(radius, opts.grid_nodes)?;
    let hp = BulkPotential::new(t)?.h_plus();

    let shooting = match reference {
        Some(p) => {
            if p.grid() != &grid {
                return Err(HedgehogError::GridMismatch);
            }
            p.clone()
        }
        None => {
            let so = ShootingOptions {
                rk_tol: opts.rk_tol,
                handoff_r: None,
                grid: opts.grid,
                grid_nodes: opts.grid_nodes,
            };
            find_shooting_param_with(t, radius, opts.shoot_tol, &so)?.profile
        }
    };

    let results: Vec<Result<RadialProfile>> = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let h = random_start(&grid, hp, &mut rng);
            let init = RadialProfile::from_values(grid.clone(), h, Provenance::external())?;
            minimize_energy(t, radius, &grid, Some(&init), opts.minimize_tol, opts.max_iters)
        })
        .collect();
    let n_failed = results.iter().filter(|r| r.is_err()).count();
    let mut profiles: Vec<RadialProfile> = results.into_iter().filter_map(|r| r.ok()).collect();
    profiles.push(shooting);

    let mut max_dist: f64 = 0.0;
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            max_dist = max_dist.max(profiles[i].sup_distance(&profiles[j])?);
        }
    }
    let roots = count_shooting_roots(t, radius, opts.scan_samples, opts.rk_tol)?;
    let threshold = dual_solver_threshold(&grid);
    let verdict = (t < 0.0).then_some(n_failed == 0 && roots == 1 && max_dist <= threshold);
    Ok(UniquenessRecord {
        n_starts,
        n_failed,
        max_pairwise_profile_distance: max_dist,
        shooting_root_count: roots,
        threshold,
        verdict,
    })
}

/// `max(1e-4, 10 dr_max^2)`, the expected agreement between solvers.
pub fn dual_solver_threshold(grid: &RadialGrid) -> f64 {
    let d = grid.max_spacing();
    (10.0 * d * d).max(1e-4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOptions {
    /// Bounds and monotonicity slack.
    pub tol: f64,
    /// Pohozaev residual allowed relative to `3 R h_plus^2`.
    pub pohozaev_rel_tol: f64,
    /// Second variation must not fall below this.
    pub second_variation_floor: f64,
    pub n_test_functions: usize,
    pub seed: u64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            pohozaev_rel_tol: 1e-4,
            second_variation_floor: -1e-8,
            n_test_functions: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub t: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub grid_intervals: usize,
    pub origin_ok: bool,
    pub bounds_ok: bool,
    pub max_bound_violation: f64,
    pub monotone_ok: bool,
    pub min_slope: f64,
    pub boundary_slope: f64,
    pub boundary_slope_ok: bool,
    pub pohozaev_residual: f64,
    pub pohozaev_ok: bool,
    /// Reported, not certified.
    pub ode_residual_max: f64,
    pub second_variation_min: f64,
    pub second_variation_ok: bool,
    pub uniqueness: Option<UniquenessRecord>,
}

impl DiagnosticsReport {
    /// All profile-level certificates pass and the uniqueness verdict, when
    /// one was asserted, holds.
    pub fn certified(&self) -> bool {
        self.profile_certified() && self.uniqueness.as_ref().and_then(|u| u.verdict) != Some(false)
    }

    pub fn profile_certified(&self) -> bool {
        self.origin_ok
            && self.bounds_ok
            && self.monotone_ok
            && self.boundary_slope_ok
            && self.pohozaev_ok
            && self.second_variation_ok
    }

    /// Pass/fail flags that depend only on the profile data.
    pub fn verdicts(&self) -> [bool; 6] {
        [
            self.origin_ok,
            self.bounds_ok,
            self.monotone_ok,
            self.boundary_slope_ok,
            self.pohozaev_ok,
            self.second_variation_ok,
        ]
    }
}

/// Profile-level certificates; `uniqueness` is left empty.
pub fn run_diagnostics(p: &RadialProfile, t: f64, opts: &DiagnosticsOptions) -> Result<DiagnosticsReport> {
    let params = ReducedParams::new(t, p.radius())?;
    params.require_nematic_global("run_diagnostics")?;
    let hp = params.h_plus()?;
    let bounds = check_bounds(p, t, opts.tol)?;
    let monotone = check_monotone(p, opts.tol);
    let poh = pohozaev_residual(p, t)?;
    let ode_max = ode_residual(p, t)?.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let sv = second_variation_min(p, t, opts.n_test_functions, opts.seed)?;
    let slope = p.boundary_slope();
    Ok(DiagnosticsReport {
        t,
        radius: p.radius(),
        grid_intervals: p.grid().intervals(),
        origin_ok: p.h()[0].abs() <= opts.tol,
        bounds_ok: bounds.ok,
        max_bound_violation: bounds.max_violation,
        monotone_ok: monotone.ok,
        min_slope: monotone.min_slope,
        boundary_slope: slope,
        boundary_slope_ok: slope > 0.0,
        pohozaev_residual: poh,
        pohozaev_ok: poh <= opts.pohozaev_rel_tol * 3.0 * p.radius() * hp * hp,
        ode_residual_max: ode_max,
        second_variation_min: sv,
        second_variation_ok: sv >= opts.second_variation_floor,
        uniqueness: None,
    })
}
