//! Shooting on the seed `a = lim h / r^2`.
//!
//! Trajectories leave the origin on the local Picard solution and are
//! continued by the adaptive integrator. `h(R; a) - h_plus` is increasing in
//! `a`, but its sensitivity grows like `exp(sqrt(g''(h_plus)) R)`, so a single
//! bisection in `a` only pins the trajectory down on an initial stretch of
//! `[0, R]`. Past the point where the two bracketing trajectories separate,
//! the solution is restarted from their common state and the slope is
//! bisected again; this repeats until the brackets agree all the way to `R`.

use crate::cauchy::{hedgehog_local_solution, hedgehog_problem, LocalSolution};
use crate::error::{HedgehogError, Result};
use crate::grid::{GridSpec, RadialGrid};
use crate::ode::{integrate, OdeOptions, Trajectory};
use crate::potential::{BulkPotential, ReducedParams};

use super::{Method, Provenance, RadialProfile};

/// Logarithmic seed scan range used to count shooting roots.
pub const SCAN_A_MIN: f64 = 1e-4;
pub const SCAN_A_MAX: f64 = 1e3;

const BRACKET_KAPPA: f64 = 10.0;
const A_CAP: f64 = 1e6;
const MAX_STAGES: usize = 200;
const AGREEMENT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingOptions {
    pub rk_tol: f64,
    /// Radius where the Picard solution hands over to the integrator;
    /// defaults to [`default_handoff`].
    pub handoff_r: Option<f64>,
    pub grid: GridSpec,
    pub grid_nodes: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            rk_tol: 1e-10,
            handoff_r: None,
            grid: GridSpec::default(),
            grid_nodes: 512,
        }
    }
}

/// `min(eps, R / 100, 1e-2)` with `eps` the contraction radius for seed `a`.
pub fn default_handoff(t: f64, radius: f64, a: f64) -> Result<f64> {
    let eps = hedgehog_problem(t, a)?.contraction_radius();
    Ok(eps.min(radius / 100.0).min(1e-2))
}

/// Solution on `[0, R]`: the local series near the origin followed by
/// integrator pieces.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    seed: f64,
    local: LocalSolution,
    /// Each piece is valid up to its paired radius.
    pieces: Vec<(Trajectory<2>, f64)>,
}

impl DenseSolution {
    pub fn seed(&self) -> f64 {
        self.seed
    }

    pub fn handoff(&self) -> f64 {
        self.local.r_valid()
    }

    pub fn r_end(&self) -> f64 {
        self.pieces.last().map_or(self.local.r_valid(), |p| p.1)
    }

    /// Number of integrator restarts.
    pub fn restarts(&self) -> usize {
        self.pieces.len().saturating_sub(1)
    }

    /// `(h(r), h'(r))`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if r <= self.local.r_valid() {
            return self.local.eval(r);
        }
        let k = self.pieces.partition_point(|p| p.1 < r);
        let (traj, _) = self
            .pieces
            .get(k)
            .ok_or_else(|| HedgehogError::invalid("r", r, "beyond the end of the solution"))?;
        let y = traj
            .eval(r)
            .ok_or_else(|| HedgehogError::invalid("r", r, "beyond the end of the solution"))?;
        Ok((y[0], y[1]))
    }

    /// Node values and exact derivatives on `grid`.
    pub fn sample(&self, grid: &RadialGrid) -> Result<RadialProfile> {
        let mut h = Vec::with_capacity(grid.len());
        let mut h1 = Vec::with_capacity(grid.len());
        for &r in grid.nodes() {
            let (v, d) = self.eval(r.min(self.r_end()))?;
            h.push(v);
            h1.push(d);
        }
        RadialProfile::new(
            grid.clone(),
            h,
            h1,
            Provenance {
                method: Method::Shooting,
                seed: Some(self.seed),
                iterations: None,
                gradient_norm: None,
            },
        )
    }
}

/// Outcome of a single shot that reached `R`.
#[derive(Debug, Clone)]
pub struct Shot {
    pub h_r: f64,
    pub h1_r: f64,
    pub solution: DenseSolution,
}

impl Shot {
    pub fn profile(&self, grid: &RadialGrid) -> Result<RadialProfile> {
        self.solution.sample(grid)
    }
}

#[derive(Debug, Clone)]
pub struct ShootingResult {
    pub a_star: f64,
    pub profile: RadialProfile,
    /// `|h(R) - h_plus|`.
    pub endpoint_miss: f64,
    /// Final bracket on `a`.
    pub bracket: (f64, f64),
    pub solution: DenseSolution,
}

struct Context {
    t: f64,
    radius: f64,
    h_plus: f64,
    opts: OdeOptions,
}

impl Context {
    fn new(t: f64, radius: f64, rk_tol: f64, operation: &'static str) -> Result<Self> {
        let params = ReducedParams::new(t, radius)?;
        params.require_nematic_global(operation)?;
        if !(rk_tol > 0.0) {
            return Err(HedgehogError::invalid("rk_tol", rk_tol, "must be positive"));
        }
        Ok(Self {
            t,
            radius,
            h_plus: BulkPotential::new(t)?.h_plus(),
            opts: OdeOptions {
                rtol: rk_tol,
                atol: 1e-3 * rk_tol,
                ..Default::default()
            },
        })
    }

    fn blowup(&self) -> f64 {
        10.0 * (1.0 + self.h_plus)
    }

    fn integrate(&self, r_start: f64, y0: [f64; 2]) -> Result<Trajectory<2>> {
        let pot = BulkPotential::new(self.t)?;
        let limit = self.blowup();
        integrate(
            |r, y: &[f64; 2]| [y[1], pot.g_prime(y[0]) - 2.0 * y[1] / r + 6.0 * y[0] / (r * r)],
            r_start,
            y0,
            self.radius,
            &self.opts,
            |_, y| y[0].abs() > limit,
        )
    }

    fn local(&self, a: f64, handoff: Option<f64>) -> Result<LocalSolution> {
        let r0 = match handoff {
            Some(r0) => {
                let eps = hedgehog_problem(self.t, a)?.contraction_radius();
                if !(r0 > 0.0 && r0 <= eps && r0 < self.radius) {
                    return Err(HedgehogError::invalid(
                        "handoff_r",
                        r0,
                        "must lie in (0, contraction radius] and below R",
                    ));
                }
                r0
            }
            None => default_handoff(self.t, self.radius, a)?,
        };
        hedgehog_local_solution(self.t, a, r0, 1e-14 * (1.0 + a.abs()))
    }

    /// Whether the trajectory ends above `h_plus`, counting blow-up by direction.
    fn above(&self, traj: &Trajectory<2>) -> bool {
        traj.final_state()[0] >= self.h_plus
    }
}

/// Integrates from the origin with seed `a` to `R`.
pub fn shoot(t: f64, radius: f64, a: f64, handoff_r: f64, rk_tol: f64) -> Result<Shot> {
    let ctx = Context::new(t, radius, rk_tol, "shoot")?;
    let local = ctx.local(a, Some(handoff_r))?;
    let (h0, d0) = local.eval(handoff_r)?;
    let traj = ctx.integrate(handoff_r, [h0, d0])?;
    if traj.stopped() {
        return Err(HedgehogError::Divergence {
            r: traj.t_end(),
            upward: traj.final_state()[0] > 0.0,
        });
    }
    let [h_r, h1_r] = traj.final_state();
    Ok(Shot {
        h_r,
        h1_r,
        solution: DenseSolution {
            seed: a,
            local,
            pieces: vec![(traj, radius)],
        },
    })
}

/// `h(R; a) - h_plus`, or an infinity of the blow-up direction when the
/// trajectory diverges before `R`.
pub fn shooting_sign(t: f64, radius: f64, a: f64, rk_tol: f64) -> Result<f64> {
    let ctx = Context::new(t, radius, rk_tol, "shooting_sign")?;
    let local = ctx.local(a, None)?;
    let r0 = local.r_valid();
    let traj = ctx.integrate(r0, {
        let (h, d) = local.eval(r0)?;
        [h, d]
    })?;
    let h = traj.final_state()[0];
    Ok(if traj.stopped() {
        f64::INFINITY.copysign(h)
    } else {
        h - ctx.h_plus
    })
}

/// Sign changes of `h(R; a) - h_plus` over `samples` log-spaced seeds in
/// `[SCAN_A_MIN, SCAN_A_MAX]`.
pub fn count_shooting_roots(t: f64, radius: f64, samples: usize, rk_tol: f64) -> Result<usize> {
    if samples < 2 {
        return Err(HedgehogError::invalid("samples", samples as f64, "need at least two seeds"));
    }
    let (lo, hi) = (SCAN_A_MIN.ln(), SCAN_A_MAX.ln());
    let mut count = 0;
    let mut prev: Option<bool> = None;
    for i in 0..samples {
        let a = (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp();
        let above = shooting_sign(t, radius, a, rk_tol)? >= 0.0;
        if prev.is_some_and(|p| p != above) {
            count += 1;
        }
        prev = Some(above);
    }
    Ok(count)
}

/// Bisects `above` on `[lo, hi]` down to adjacent floats.
/// `above(lo)` must be false and `above(hi)` true.
fn bisect<T>(
    mut lo: f64,
    mut hi: f64,
    mut lo_val: T,
    mut hi_val: T,
    mut run: impl FnMut(f64) -> Result<(bool, T)>,
) -> Result<(f64, f64, T, T)> {
    loop {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Ok((lo, hi, lo_val, hi_val));
        }
        let (above, val) = run(mid)?;
        if above {
            hi = mid;
            hi_val = val;
        } else {
            lo = mid;
            lo_val = val;
        }
    }
}

/// Last sampled radius in `[r_s, end]` up to which `lo` and `hi` agree
/// within `tol`, or `None` if they agree on the whole range.
fn agreement_end(lo: &Trajectory<2>, hi: &Trajectory<2>, r_s: f64, end: f64, tol: f64) -> Option<f64> {
    let mut last_ok = r_s;
    for i in 0..=AGREEMENT_SAMPLES {
        let r = if i == AGREEMENT_SAMPLES {
            end
        } else {
            r_s + (end - r_s) * i as f64 / AGREEMENT_SAMPLES as f64
        };
        let (a, b) = (lo.eval(r).unwrap(), hi.eval(r).unwrap());
        if (a[0] - b[0]).abs() > tol {
            return Some(last_ok);
        }
        last_ok = r;
    }
    None
}

/// Seed `a*` with `|h(R; a*) - h_plus| <= tol`, using default options.
pub fn find_shooting_param(t: f64, radius: f64, tol: f64) -> Result<ShootingResult> {
    find_shooting_param_with(t, radius, tol, &ShootingOptions::default())
}

pub fn find_shooting_param_with(t: f64, radius: f64, tol: f64, opts: &ShootingOptions) -> Result<ShootingResult> {
    let ctx = Context::new(t, radius, opts.rk_tol, "find_shooting_param")?;
    if !(tol > 0.0) {
        return Err(HedgehogError::invalid("tol", tol, "must be positive"));
    }
    let grid = opts.grid.build(radius, opts.grid_nodes)?;

    let run_seed = |a: f64| -> Result<(bool, (LocalSolution, Trajectory<2>))> {
        let local = ctx.local(a, opts.handoff_r)?;
        let r0 = local.r_valid();
        let (h, d) = local.eval(r0)?;
        let traj = ctx.integrate(r0, [h, d])?;
        Ok((ctx.above(&traj), (local, traj)))
    };

    // a = 0 is the isotropic solution, always below h_plus
    let mut lo = 0.0;
    let (_, mut lo_run) = run_seed(lo)?;
    let mut hi = BRACKET_KAPPA * ctx.h_plus / (radius * radius);
    let hi_run = loop {
        let (above, run) = run_seed(hi)?;
        if above {
            break run;
        }
        lo = hi;
        lo_run = run;
        hi *= 10.0;
        if hi > A_CAP {
            return Err(HedgehogError::NoBracket { lo: 0.0, hi: A_CAP });
        }
    };
    let (a_lo, a_hi, (local, mut lo_traj), (_, mut hi_traj)) = bisect(lo, hi, lo_run, hi_run, run_seed)?;

    let mut pieces = Vec::new();
    let mut r_s = local.r_valid();
    loop {
        if pieces.len() > MAX_STAGES {
            return Err(HedgehogError::NonConvergence {
                solver: "find_shooting_param",
                iterations: pieces.len(),
                residual: r_s,
            });
        }
        let end = lo_traj.t_end().min(hi_traj.t_end());
        let reached = !lo_traj.stopped() && !hi_traj.stopped();
        match agreement_end(&lo_traj, &hi_traj, r_s, end, tol) {
            None if reached => {
                pieces.push((lo_traj, radius));
                break;
            }
            found => {
                let r_v = found.unwrap_or(end);
                let r_m = r_s + 0.9 * (r_v - r_s);
                if !(r_m > r_s) {
                    return Err(HedgehogError::NonConvergence {
                        solver: "find_shooting_param",
                        iterations: pieces.len(),
                        residual: r_s,
                    });
                }
                let (yl, yh) = (lo_traj.eval(r_m).unwrap(), hi_traj.eval(r_m).unwrap());
                let h_m = 0.5 * (yl[0] + yh[0]);
                let p_m = 0.5 * (yl[1] + yh[1]);
                pieces.push((lo_traj, r_m));

                let run_slope = |s: f64| -> Result<(bool, Trajectory<2>)> {
                    let traj = ctx.integrate(r_m, [h_m, s])?;
                    Ok((ctx.above(&traj), traj))
                };
                let mut width = 1e-3 * (1.0 + p_m.abs());
                let (mut s_lo, mut s_hi) = (p_m - width, p_m + width);
                let (mut above_lo, mut t_lo) = run_slope(s_lo)?;
                let (mut above_hi, mut t_hi) = run_slope(s_hi)?;
                let mut tries = 0;
                while above_lo || !above_hi {
                    tries += 1;
                    if tries > 60 {
                        return Err(HedgehogError::NoBracket { lo: s_lo, hi: s_hi });
                    }
                    width *= 2.0;
                    if above_lo {
                        s_lo -= width;
                        (above_lo, t_lo) = run_slope(s_lo)?;
                    }
                    if !above_hi {
                        s_hi += width;
                        (above_hi, t_hi) = run_slope(s_hi)?;
                    }
                }
                let (_, _, new_lo, new_hi) = bisect(s_lo, s_hi, t_lo, t_hi, run_slope)?;
                lo_traj = new_lo;
                hi_traj = new_hi;
                r_s = r_m;
            }
        }
    }

    let solution = DenseSolution {
        seed: a_lo,
        local,
        pieces,
    };
    let profile = solution.sample(&grid)?;
    let (h_r, _) = solution.eval(radius)?;
    let endpoint_miss = (h_r - ctx.h_plus).abs();
    if endpoint_miss > tol {
        return Err(HedgehogError::NonConvergence {
            solver: "find_shooting_param",
            iterations: solution.pieces.len(),
            residual: endpoint_miss,
        });
    }
    Ok(ShootingResult {
        a_star: a_lo,
        profile,
        endpoint_miss,
        bracket: (a_lo, a_hi),
        solution,
    })
}
