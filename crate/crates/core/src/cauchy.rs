//! Singular Cauchy problem at the origin.
//!
//! Solves
//!
//! ```text
//! d/dr [ r^alpha d/dr [ r^beta h ] ] = r^(alpha+beta) F(h),   h(r) / r^gamma -> a,
//! ```
//!
//! with `gamma = 1 - alpha - beta >= 0`, `alpha < 1` and `F(0) = 0`, by Picard
//! iteration of the equivalent integral equation
//!
//! ```text
//! h(r) = a r^gamma + r^-beta int_0^r rho^-alpha int_0^rho s^(alpha+beta) F(h(s)) ds drho.
//! ```
//!
//! Two routes are provided. When `F` is a polynomial and `gamma` an integer
//! the iterates are truncated power series and the double integral acts on
//! monomials exactly. Otherwise the iterates are tabulated on a logarithmic
//! grid and the integrals are done by a fourth-order cumulative rule.
//!
//! The hedgehog equation is the instance `alpha = -4`, `beta = 3`, `gamma = 2`,
//! `F = g'`.

use std::fmt;
use std::sync::Arc;

use crate::error::{HedgehogError, Result};
use crate::potential::BulkPotential;

/// Right-hand side nonlinearity `F` with `F(0) = 0`.
#[derive(Clone)]
pub enum Nonlinearity {
    /// Coefficients, lowest degree first.
    Polynomial(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Nonlinearity::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Nonlinearity {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Nonlinearity::Function(Arc::new(f))
    }

    pub fn eval(&self, h: f64) -> f64 {
        match self {
            Nonlinearity::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * h + ck),
            Nonlinearity::Function(f) => f(h),
        }
    }

    /// Rigorous Lipschitz bound on `[-m, m]` for polynomials,
    /// `sum_k k |c_k| m^(k-1)`. `None` for general functions.
    fn polynomial_lipschitz(&self, m: f64) -> Option<f64> {
        match self {
            Nonlinearity::Polynomial(c) => Some(
                c.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, ck)| k as f64 * ck.abs() * m.powi(k as i32 - 1))
                    .sum(),
            ),
            Nonlinearity::Function(_) => None,
        }
    }
}

/// Largest difference quotient of `f` over `samples` equal subintervals of
/// `[-m, m]`, inflated by 10%. An estimate, not a bound.
pub fn estimate_lipschitz(f: &dyn Fn(f64) -> f64, m: f64, samples: usize) -> f64 {
    let samples = samples.max(2);
    let step = 2.0 * m / samples as f64;
    let mut prev = f(-m);
    let mut best: f64 = 0.0;
    for i in 1..=samples {
        let cur = f(-m + step * i as f64);
        best = best.max(((cur - prev) / step).abs());
        prev = cur;
    }
    1.1 * best
}

#[derive(Debug, Clone)]
pub struct SingularCauchyProblem {
    alpha: f64,
    beta: f64,
    gamma: f64,
    nonlinearity: Nonlinearity,
    lipschitz: f64,
    seed: f64,
}

impl SingularCauchyProblem {
    /// `lipschitz` is the Lipschitz constant of `F` on `[-|a|-1, |a|+1]`.
    /// When omitted it is bounded from the coefficients for polynomials and
    /// estimated by sampling otherwise.
    pub fn new(
        alpha: f64,
        beta: f64,
        nonlinearity: Nonlinearity,
        seed: f64,
        lipschitz: Option<f64>,
    ) -> Result<Self> {
        if !(alpha < 1.0) {
            return Err(HedgehogError::invalid("alpha", alpha, "must be < 1"));
        }
        let gamma = 1.0 - alpha - beta;
        if !(gamma >= 0.0) {
            return Err(HedgehogError::invalid("gamma", gamma, "1 - alpha - beta must be >= 0"));
        }
        if !seed.is_finite() {
            return Err(HedgehogError::invalid("a", seed, "must be finite"));
        }
        let f0 = nonlinearity.eval(0.0);
        if f0.abs() > 1e-14 {
            return Err(HedgehogError::invalid("F(0)", f0, "nonlinearity must vanish at 0"));
        }
        let m = seed.abs() + 1.0;
        let lipschitz = match lipschitz {
            Some(k) => k,
            None => match nonlinearity.polynomial_lipschitz(m) {
                // any K > 0 is a Lipschitz constant of the zero polynomial
                Some(0.0) => 1.0,
                Some(k) => k,
                None => {
                    let Nonlinearity::Function(f) = &nonlinearity else { unreachable!() };
                    estimate_lipschitz(f.as_ref(), m, 20_000).max(f64::MIN_POSITIVE)
                }
            },
        };
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(HedgehogError::invalid("K", lipschitz, "Lipschitz constant must be positive"));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            nonlinearity,
            lipschitz,
            seed,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn seed(&self) -> f64 {
        self.seed
    }
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    /// `delta = sqrt(2 (3 - alpha) / ((1 + |a|) K))`.
    pub fn delta(&self) -> f64 {
        (2.0 * (3.0 - self.alpha) / ((1.0 + self.seed.abs()) * self.lipschitz)).sqrt()
    }

    /// Radius `min(delta, 1)` on which the Picard iterates stay in the
    /// `(1 + |a|) r^gamma` envelope and converge.
    pub fn contraction_radius(&self) -> f64 {
        self.delta().min(1.0)
    }

    /// `C = K / (6 - 2 alpha)`.
    pub fn picard_constant(&self) -> f64 {
        self.lipschitz / (6.0 - 2.0 * self.alpha)
    }

    /// A-priori bound on `|h_{n+1}(r) - h_n(r)|`:
    /// `(1 + |a|) C^n r^(2n + gamma) / n!`.
    pub fn gap_bound(&self, n: usize, r: f64) -> f64 {
        let c = self.picard_constant();
        let mut term = (1.0 + self.seed.abs()) * r.powf(self.gamma);
        for k in 1..=n {
            term *= c * r * r / k as f64;
        }
        term
    }

    /// Bound on the distance from iterate `n` to the limit, in the norm
    /// weighted by `r^-gamma`, at radius `r`.
    fn tail_bound(&self, n: usize, r: f64) -> f64 {
        let x = self.picard_constant() * r * r;
        let mut term = 1.0 + self.seed.abs();
        for k in 1..=n {
            term *= x / k as f64;
        }
        let mut sum = 0.0;
        let mut k = n;
        while term > 1e-300 && k < n + 500 {
            sum += term;
            k += 1;
            term *= x / k as f64;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    fn integer_gamma(&self) -> Option<usize> {
        let g = self.gamma.round();
        ((self.gamma - g).abs() < 1e-12).then_some(g as usize)
    }
}

/// Free function form of [`SingularCauchyProblem::contraction_radius`].
pub fn contraction_radius(p: &SingularCauchyProblem) -> f64 {
    p.contraction_radius()
}

/// Truncated power series `sum_m d_m (r / scale)^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
    scale: f64,
}

impl PowerSeries {
    fn zeros(degree: usize, scale: f64) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
            scale,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `r^m` in unscaled form.
    pub fn coefficient(&self, m: usize) -> f64 {
        self.coeffs.get(m).map_or(0.0, |d| d / self.scale.powi(m as i32))
    }

    pub fn eval(&self, r: f64) -> f64 {
        let s = r / self.scale;
        self.coeffs.iter().rev().fold(0.0, |acc, &d| acc * s + d)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let s = r / self.scale;
        let mut acc = 0.0;
        for (m, &d) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * s + m as f64 * d;
        }
        acc / self.scale
    }

    fn mul(&self, other: &Self) -> Self {
        let n = self.degree();
        let mut out = Self::zeros(n, self.scale);
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }

    fn compose(coeffs: &[f64], h: &Self) -> Self {
        let mut acc = Self::zeros(h.degree(), h.scale);
        for &c in coeffs.iter().rev() {
            acc = acc.mul(h);
            acc.coeffs[0] += c;
        }
        acc
    }
}

/// Route used by [`picard_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Series when possible, quadrature otherwise.
    Auto,
    Series,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Series keeps powers up to `gamma + 2 * truncation_order`.
    pub truncation_order: usize,
    /// Quadrature grid density in `ln r`.
    pub points_per_decade: usize,
    /// Quadrature grid spans `[r_max 10^-decades, r_max]`.
    pub decades: f64,
    pub route: Route,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            truncation_order: 20,
            points_per_decade: 1000,
            decades: 10.0,
            route: Route::Auto,
        }
    }
}

#[derive(Debug, Clone)]
enum Representation {
    Series(PowerSeries),
    Tabulated {
        ln_r0: f64,
        du: f64,
        h: Vec<f64>,
        dh: Vec<f64>,
        gamma: f64,
    },
}

/// Converged local solution on `(0, r_valid]`.
#[derive(Debug, Clone)]
pub struct LocalSolution {
    r_valid: f64,
    n_iters: usize,
    residual: f64,
    gaps: Vec<f64>,
    repr: Representation,
}

impl LocalSolution {
    pub fn r_valid(&self) -> f64 {
        self.r_valid
    }

    pub fn n_iters(&self) -> usize {
        self.n_iters
    }

    /// Weighted sup-norm residual of the integral equation.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Weighted sup-norm gaps `|h_{n+1} - h_n| / r^gamma` per iteration.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn series(&self) -> Option<&PowerSeries> {
        match &self.repr {
            Representation::Series(s) => Some(s),
            Representation::Tabulated { .. } => None,
        }
    }

    /// `(h(r), h'(r))` for `r` in `[0, r_valid]`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0 && r <= self.r_valid * (1.0 + 1e-12)) {
            return Err(HedgehogError::invalid("r", r, "outside the local solution's range"));
        }
        Ok(match &self.repr {
            Representation::Series(s) => (s.eval(r), s.derivative(r)),
            Representation::Tabulated {
                ln_r0,
                du,
                h,
                dh,
                gamma,
            } => {
                let r0 = ln_r0.exp();
                if r <= r0 {
                    if r == 0.0 {
                        let h0 = if *gamma == 0.0 { h[0] } else { 0.0 };
                        return Ok((h0, 0.0));
                    }
                    let v = h[0] * (r / r0).powf(*gamma);
                    return Ok((v, gamma * v / r));
                }
                let u = r.ln();
                let x = ((u - ln_r0) / du).min((h.len() - 1) as f64);
                let i = (x.floor() as usize).min(h.len() - 2);
                let s = x - i as f64;
                // Hermite cubic in u with dh/du = r h'
                let r_i = (ln_r0 + du * i as f64).exp();
                let r_j = (ln_r0 + du * (i + 1) as f64).exp();
                let (p0, p1) = (h[i], h[i + 1]);
                let (m0, m1) = (r_i * dh[i] * du, r_j * dh[i + 1] * du);
                let s2 = s * s;
                let s3 = s2 * s;
                let val = (2.0 * s3 - 3.0 * s2 + 1.0) * p0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * p1
                    + (s3 - s2) * m1;
                let dval = ((6.0 * s2 - 6.0 * s) * p0
                    + (3.0 * s2 - 4.0 * s + 1.0) * m0
                    + (-6.0 * s2 + 6.0 * s) * p1
                    + (3.0 * s2 - 2.0 * s) * m1)
                    / du;
                (val, dval / r)
            }
        })
    }
}

/// Seed iterate `a r^gamma` in series form.
fn seed_series(p: &SingularCauchyProblem, gamma: usize, degree: usize, scale: f64) -> PowerSeries {
    let mut s = PowerSeries::zeros(degree, scale);
    s.coeffs[gamma] = p.seed * scale.powi(gamma as i32);
    s
}

/// One Picard step on a series iterate.
fn series_step(p: &SingularCauchyProblem, seed: &PowerSeries, h: &PowerSeries) -> PowerSeries {
    let Nonlinearity::Polynomial(coeffs) = &p.nonlinearity else {
        unreachable!("series route requires a polynomial nonlinearity")
    };
    let f = PowerSeries::compose(coeffs, h);
    let mut out = seed.clone();
    let s2 = h.scale * h.scale;
    let ab1 = p.alpha + p.beta + 1.0;
    for m in 0..=h.degree().saturating_sub(2) {
        let d = f.coeffs[m];
        if d == 0.0 {
            continue;
        }
        let mf = m as f64;
        out.coeffs[m + 2] += d * s2 / ((mf + ab1) * (mf + p.beta + 2.0));
    }
    out
}

/// The first `count` Picard iterates `h_0 = a r^gamma, h_1, ...` as series.
pub fn picard_iterates(
    p: &SingularCauchyProblem,
    scale: f64,
    count: usize,
    truncation_order: usize,
) -> Result<Vec<PowerSeries>> {
    let gamma = series_gamma(p)?;
    let degree = gamma + 2 * truncation_order;
    let seed = seed_series(p, gamma, degree, scale);
    let mut out = vec![seed.clone()];
    while out.len() < count {
        let next = series_step(p, &seed, out.last().unwrap());
        out.push(next);
    }
    Ok(out)
}

fn series_gamma(p: &SingularCauchyProblem) -> Result<usize> {
    match (&p.nonlinearity, p.integer_gamma()) {
        (Nonlinearity::Polynomial(_), Some(g)) => Ok(g),
        _ => Err(HedgehogError::InvalidInput(
            "series route needs a polynomial nonlinearity and integer gamma".into(),
        )),
    }
}

fn sample_radii(r_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| r_max * i as f64 / n as f64).collect()
}

/// Picard iteration with default options.
pub fn picard_solve(p: &SingularCauchyProblem, r_max: f64, tol: f64, n_max: usize) -> Result<LocalSolution> {
    picard_solve_with(p, r_max, tol, n_max, &PicardOptions::default())
}

/// Iterates until successive iterates differ by less than `tol` in the
/// `r^-gamma` weighted sup norm, or the a-priori tail bound guarantees `tol`.
pub fn picard_solve_with(
    p: &SingularCauchyProblem,
    r_max: f64,
    tol: f64,
    n_max: usize,
    opts: &PicardOptions,
) -> Result<LocalSolution> {
    if !(tol > 0.0) {
        return Err(HedgehogError::invalid("tol", tol, "must be positive"));
    }
    let eps = p.contraction_radius();
    if !(r_max > 0.0 && r_max <= eps) {
        return Err(HedgehogError::invalid("r_max", r_max, "must lie in (0, contraction radius]"));
    }
    let use_series = match opts.route {
        Route::Series => {
            series_gamma(p)?;
            true
        }
        Route::Quadrature => false,
        Route::Auto => series_gamma(p).is_ok(),
    };
    if use_series {
        solve_series(p, r_max, tol, n_max, opts.truncation_order)
    } else {
        solve_tabulated(p, r_max, tol, n_max, opts)
    }
}

fn solve_series(
    p: &SingularCauchyProblem,
    r_max: f64,
    tol: f64,
    n_max: usize,
    truncation_order: usize,
) -> Result<LocalSolution> {
    let gamma = series_gamma(p)?;
    let degree = gamma + 2 * truncation_order;
    let seed = seed_series(p, gamma, degree, r_max);
    let radii = sample_radii(r_max, 64);
    let weighted_gap = |a: &PowerSeries, b: &PowerSeries| {
        radii
            .iter()
            .map(|&r| (a.eval(r) - b.eval(r)).abs() / r.powi(gamma as i32))
            .fold(0.0, f64::max)
    };

    let mut h = seed.clone();
    let mut gaps = Vec::new();
    for n in 0..n_max {
        let next = series_step(p, &seed, &h);
        let gap = weighted_gap(&next, &h);
        gaps.push(gap);
        h = next;
        if gap < tol || p.tail_bound(n + 1, r_max) < tol {
            let residual = weighted_gap(&series_step(p, &seed, &h), &h);
            if residual > 10.0 * tol {
                return Err(HedgehogError::NonConvergence {
                    solver: "picard (series)",
                    iterations: n + 1,
                    residual,
                });
            }
            return Ok(LocalSolution {
                r_valid: r_max,
                n_iters: n + 1,
                residual,
                gaps,
                repr: Representation::Series(h),
            });
        }
    }
    Err(HedgehogError::NonConvergence {
        solver: "picard (series)",
        iterations: n_max,
        residual: gaps.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Cumulative integral of uniformly sampled `f` with a four-point rule,
/// fourth-order accurate; `out[0] = 0`.
fn cumulative_integral(f: &[f64], du: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 4, "cumulative rule needs at least four samples");
    let mut out = vec![0.0; n];
    let w = du / 24.0;
    for i in 0..n - 1 {
        let piece = if i == 0 {
            w * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i == n - 2 {
            w * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1])
        } else {
            w * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        };
        out[i + 1] = out[i] + piece;
    }
    out
}

fn solve_tabulated(
    p: &SingularCauchyProblem,
    r_max: f64,
    tol: f64,
    n_max: usize,
    opts: &PicardOptions,
) -> Result<LocalSolution> {
    let n = ((opts.decades * opts.points_per_decade as f64).ceil() as usize).max(8);
    let ln_rmax = r_max.ln();
    let ln_r0 = ln_rmax - opts.decades * std::f64::consts::LN_10;
    let du = (ln_rmax - ln_r0) / n as f64;
    let radii: Vec<f64> = (0..=n)
        .map(|i| if i == n { r_max } else { (ln_r0 + du * i as f64).exp() })
        .collect();
    let (alpha, beta, gamma, a) = (p.alpha, p.beta, p.gamma, p.seed);
    let weight: Vec<f64> = radii.iter().map(|r| r.powf(gamma)).collect();

    // one Picard step; returns (h, h')
    let step = |h: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let r0 = radii[0];
        let inner_integrand: Vec<f64> = radii
            .iter()
            .zip(h)
            .map(|(&r, &v)| r.powf(alpha + beta + 1.0) * p.nonlinearity.eval(v))
            .collect();
        // head of the inner integral on (0, r0), integrand ~ s^(alpha+beta+gamma)
        let head1 = inner_integrand[0] / 2.0;
        let inner: Vec<f64> = cumulative_integral(&inner_integrand, du)
            .into_iter()
            .map(|v| v + head1)
            .collect();
        let outer_integrand: Vec<f64> = radii
            .iter()
            .zip(&inner)
            .map(|(&r, &v)| r.powf(1.0 - alpha) * v)
            .collect();
        let head2 = r0.powf(1.0 - alpha) * inner[0] / (3.0 - alpha);
        let outer: Vec<f64> = cumulative_integral(&outer_integrand, du)
            .into_iter()
            .map(|v| v + head2)
            .collect();
        let mut hv = Vec::with_capacity(radii.len());
        let mut dv = Vec::with_capacity(radii.len());
        for (i, &r) in radii.iter().enumerate() {
            hv.push(a * r.powf(gamma) + r.powf(-beta) * outer[i]);
            let lead = if gamma == 0.0 { 0.0 } else { gamma * a * r.powf(gamma - 1.0) };
            dv.push(lead - beta * r.powf(-beta - 1.0) * outer[i] + r.powf(-beta - alpha) * inner[i]);
        }
        (hv, dv)
    };
    let weighted_gap = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .zip(&weight)
            .map(|((u, v), w)| (u - v).abs() / w.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };

    let mut h: Vec<f64> = weight.iter().map(|w| a * w).collect();
    let mut gaps = Vec::new();
    for it in 0..n_max {
        let (next, dh) = step(&h);
        let gap = weighted_gap(&next, &h);
        gaps.push(gap);
        h = next;
        if gap < tol || p.tail_bound(it + 1, r_max) < tol {
            let (check, _) = step(&h);
            let residual = weighted_gap(&check, &h);
            if residual > 10.0 * tol {
                return Err(HedgehogError::NonConvergence {
                    solver: "picard (quadrature)",
                    iterations: it + 1,
                    residual,
                });
            }
            return Ok(LocalSolution {
                r_valid: r_max,
                n_iters: it + 1,
                residual,
                gaps,
                repr: Representation::Tabulated {
                    ln_r0,
                    du,
                    h,
                    dh,
                    gamma,
                },
            });
        }
    }
    Err(HedgehogError::NonConvergence {
        solver: "picard (quadrature)",
        iterations: n_max,
        residual: gaps.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Hedgehog instance: `alpha = -4`, `beta = 3`, `F = g'(., t)`, with the
/// exact Lipschitz constant of `g'` on `[-|a|-1, |a|+1]`.
pub fn hedgehog_problem(t: f64, a: f64) -> Result<SingularCauchyProblem> {
    let pot = BulkPotential::new(t)?;
    let m = a.abs() + 1.0;
    // |g''| is a convex quadratic in h: extremes at the ends or the vertex h = 1/2
    let k = [-m, m, 0.5]
        .iter()
        .map(|&h| pot.g_second(h).abs())
        .fold(0.0, f64::max);
    SingularCauchyProblem::new(
        -4.0,
        3.0,
        Nonlinearity::Polynomial(pot.g_prime_coefficients().to_vec()),
        a,
        Some(k.max(f64::MIN_POSITIVE)),
    )
}

/// Local hedgehog solution with `h(r) / r^2 -> a` on `(0, r0]`.
pub fn hedgehog_local_solution(t: f64, a: f64, r0: f64, tol: f64) -> Result<LocalSolution> {
    let p = hedgehog_problem(t, a)?;
    picard_solve(&p, r0, tol, 200)
}

/// `(h(r0), h'(r0))` of the local hedgehog solution with `h(r) / r^2 -> a`.
pub fn hedgehog_local(t: f64, a: f64, r0: f64, tol: f64) -> Result<(f64, f64)> {
    hedgehog_local_solution(t, a, r0, tol)?.eval(r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn linear(lambda: f64, a: f64) -> SingularCauchyProblem {
        SingularCauchyProblem::new(-4.0, 3.0, Nonlinearity::Polynomial(vec![0.0, lambda]), a, None).unwrap()
    }

    #[test]
    fn contraction_radius_examples() {
        for a in [0.0, 0.5, -3.0] {
            let p = SingularCauchyProblem::new(
                -4.0,
                3.0,
                Nonlinearity::Polynomial(vec![0.0, 1.0]),
                a,
                Some(14.0 / (1.0 + f64::abs(a))),
            )
            .unwrap();
            assert_abs_diff_eq!(p.delta(), 1.0, epsilon = 1e-15);
            assert_eq!(p.contraction_radius(), 1.0);
        }
        let p = SingularCauchyProblem::new(-4.0, 3.0, Nonlinearity::Polynomial(vec![0.0, 1.0]), 0.0, Some(1.0)).unwrap();
        assert_abs_diff_eq!(p.delta(), 14f64.sqrt(), epsilon = 1e-15);
        assert_eq!(contraction_radius(&p), 1.0);
        let stiff = SingularCauchyProblem::new(-4.0, 3.0, Nonlinearity::Polynomial(vec![0.0, 1.0]), 0.0, Some(1e12)).unwrap();
        assert!(stiff.contraction_radius() < 1e-5);
    }

    #[test]
    fn rejects_invalid_problems() {
        let lin = || Nonlinearity::Polynomial(vec![0.0, 1.0]);
        assert!(SingularCauchyProblem::new(1.0, -0.5, lin(), 1.0, None).is_err());
        assert!(SingularCauchyProblem::new(-4.0, 6.0, lin(), 1.0, None).is_err());
        assert!(SingularCauchyProblem::new(-4.0, 3.0, Nonlinearity::Polynomial(vec![1.0, 1.0]), 1.0, None).is_err());
        assert!(SingularCauchyProblem::new(-4.0, 3.0, lin(), 1.0, Some(0.0)).is_err());
        assert!(SingularCauchyProblem::new(-4.0, 3.0, lin(), 1.0, Some(-2.0)).is_err());
        let p = linear(1.0, 1.0);
        assert!(picard_solve(&p, 2.0 * p.contraction_radius(), 1e-12, 50).is_err());
        assert!(picard_solve(&p, 0.1, 0.0, 50).is_err());
    }

    #[test]
    fn zero_nonlinearity_gives_kernel_solution() {
        for (alpha, beta) in [(-4.0, 3.0), (0.0, 0.0), (0.5, -1.5), (-2.0, 1.0)] {
            let p = SingularCauchyProblem::new(alpha, beta, Nonlinearity::Polynomial(vec![0.0]), 1.7, Some(1.0)).unwrap();
            let gamma = p.gamma();
            let sol = picard_solve(&p, 0.9, 1e-14, 20).unwrap();
            for r in [0.01, 0.3, 0.9] {
                let (h, dh) = sol.eval(r).unwrap();
                assert_abs_diff_eq!(h, 1.7 * r.powf(gamma), epsilon = 1e-14);
                if gamma > 0.0 {
                    assert_abs_diff_eq!(dh, 1.7 * gamma * r.powf(gamma - 1.0), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn linear_nonlinearity_first_correction() {
        // one Picard step: a r^2 -> a r^2 + lambda a r^4 / (2 * 7)
        let (lambda, a) = (-2.5, 0.8);
        let sol = picard_solve(&linear(lambda, a), 0.2, 1e-15, 100).unwrap();
        let s = sol.series().unwrap();
        assert_abs_diff_eq!(s.coefficient(2), a, epsilon = 1e-14);
        assert_abs_diff_eq!(s.coefficient(4), lambda * a / 14.0, epsilon = 1e-13);
        // second step: r^4 -> r^6 / (4 * 9)
        assert_abs_diff_eq!(s.coefficient(6), lambda * lambda * a / (14.0 * 36.0), epsilon = 1e-13);
        assert_eq!(s.coefficient(3), 0.0);
    }

    #[test]
    fn hedgehog_series_coefficient() {
        for t in [-8.0, -1.0, 0.0, 0.5] {
            for a in [0.5, 1.0, 2.0] {
                let p = hedgehog_problem(t, a).unwrap();
                let sol = picard_solve(&p, p.contraction_radius(), 1e-14, 200).unwrap();
                let s = sol.series().unwrap();
                assert_abs_diff_eq!(s.coefficient(4), t * a / 14.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hedgehog_local_examples() {
        assert_eq!(hedgehog_local(-3.0, 0.0, 0.1, 1e-14).unwrap(), (0.0, 0.0));
        for r0 in [1e-2, 1e-3, 1e-4] {
            let (h, _) = hedgehog_local(0.0, 1.0, r0, 1e-14).unwrap();
            assert_abs_diff_eq!(h / (r0 * r0), 1.0, epsilon = 2.0 * r0 * r0);
        }
        let r0 = 0.05;
        let (h, _) = hedgehog_local(-1.0, 1.0, r0, 1e-14).unwrap();
        // r^4: t a / 14; r^6: (t^2 a / 14 - 3 a^2) / 36 = -41 / 504
        let series = r0 * r0 - r0.powi(4) / 14.0 - 41.0 * r0.powi(6) / 504.0;
        assert!((h - series).abs() < r0.powi(8), "{}", h - series);
        assert!(hedgehog_local(-1.0, 1.0, 5.0, 1e-12).is_err());
    }

    #[test]
    fn iterates_respect_envelope_and_gap_bound() {
        for a in [0.5, 1.0, 2.0] {
            let p = hedgehog_problem(-8.0, a).unwrap();
            let eps = p.contraction_radius();
            let its = picard_iterates(&p, eps, 12, 20).unwrap();
            for i in 1..=40 {
                let r = eps * i as f64 / 40.0;
                for (n, w) in its.windows(2).enumerate() {
                    assert!(w[0].eval(r).abs() <= (1.0 + a) * r * r * (1.0 + 1e-12));
                    let gap = (w[1].eval(r) - w[0].eval(r)).abs();
                    assert!(gap <= p.gap_bound(n, r) * (1.0 + 1e-9) + 1e-300, "a={a} n={n} r={r}");
                }
            }
        }
    }

    #[test]
    fn quadrature_route_matches_series_route() {
        let p = hedgehog_problem(-2.0, 1.3).unwrap();
        let eps = p.contraction_radius();
        let series = picard_solve(&p, eps, 1e-14, 200).unwrap();
        let max_error = |ppd: usize| {
            let opts = PicardOptions {
                route: Route::Quadrature,
                points_per_decade: ppd,
                ..Default::default()
            };
            let quad = picard_solve_with(&p, eps, 1e-14, 200, &opts).unwrap();
            assert!(quad.series().is_none());
            let mut worst: (f64, f64) = (0.0, 0.0);
            for i in 1..=50 {
                let r = eps * (i as f64 - 0.3) / 50.0;
                let (hs, ds) = series.eval(r).unwrap();
                let (hq, dq) = quad.eval(r).unwrap();
                worst.0 = worst.0.max((hs - hq).abs() / (r * r));
                worst.1 = worst.1.max((ds - dq).abs() / r);
            }
            worst
        };
        let coarse = max_error(250);
        let fine = max_error(500);
        let default = max_error(PicardOptions::default().points_per_decade);
        // fourth order in the log spacing for h, third for h'
        assert!(coarse.0 / fine.0 > 12.0, "{coarse:?} {fine:?}");
        assert!(coarse.1 / fine.1 > 6.0, "{coarse:?} {fine:?}");
        assert!(default.0 < 1e-10 && default.1 < 1e-8, "{default:?}");
    }

    #[test]
    fn quadrature_route_handles_general_nonlinearity() {
        // F(h) = sin(h) with alpha = -4, beta = 3; compare against the series of
        // its Taylor polynomial, which agrees to O(h^9) near the origin.
        let taylor = vec![0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0, 0.0, -1.0 / 5040.0];
        let p_fn = SingularCauchyProblem::new(-4.0, 3.0, Nonlinearity::function(f64::sin), 0.9, None).unwrap();
        let p_poly = SingularCauchyProblem::new(-4.0, 3.0, Nonlinearity::Polynomial(taylor), 0.9, Some(p_fn.lipschitz())).unwrap();
        assert!(p_fn.lipschitz() >= 1.0 && p_fn.lipschitz() <= 1.2);
        let r = 0.5f64.min(p_fn.contraction_radius());
        let a = picard_solve(&p_fn, r, 1e-13, 100).unwrap();
        let b = picard_solve(&p_poly, r, 1e-13, 100).unwrap();
        for i in 1..=10 {
            let x = r * i as f64 / 10.0;
            assert_abs_diff_eq!(a.eval(x).unwrap().0, b.eval(x).unwrap().0, epsilon = 1e-10 * x * x);
        }
    }

    #[test]
    fn local_solution_satisfies_ode() {
        let t = -3.0;
        let pot = BulkPotential::new(t).unwrap();
        let p = hedgehog_problem(t, 1.5).unwrap();
        let eps = p.contraction_radius();
        let sol = picard_solve(&p, eps, 1e-14, 200).unwrap();
        let step = 1e-4 * eps;
        for frac in [0.3, 0.6, 0.9] {
            let r = frac * eps;
            let (h, h1) = sol.eval(r).unwrap();
            let h2 = (sol.eval(r + step).unwrap().1 - sol.eval(r - step).unwrap().1) / (2.0 * step);
            let res = h2 + 2.0 * h1 / r - 6.0 * h / (r * r) - pot.g_prime(h);
            assert!(res.abs() < 1e-6, "residual {res}");
        }
    }

    #[test]
    fn reported_convergence_data() {
        let p = hedgehog_problem(-8.0, 1.0).unwrap();
        let sol = picard_solve(&p, p.contraction_radius(), 1e-12, 200).unwrap();
        assert!(sol.residual() <= 1e-11);
        assert_eq!(sol.gaps().len(), sol.n_iters());
        assert!(sol.gaps().windows(2).all(|w| w[1] <= w[0] * 1.0001 || w[1] < 1e-15));
        let hit = picard_solve(&p, p.contraction_radius(), 1e-12, 1);
        assert!(matches!(hit, Err(HedgehogError::NonConvergence { .. })));
    }
}
