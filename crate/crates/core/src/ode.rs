//! Adaptive Dormand-Prince 5(4) integrator with continuous output.

use crate::error::{HedgehogError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; defaults to a tenth of the start point or of the span.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let rc = &self.rc;
        std::array::from_fn(|i| rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i]))))
    }
}

/// Accepted steps from `t_start` to `t_end`, continuous in between.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    t_start: f64,
    y_start: [f64; N],
    segments: Vec<Segment<N>>,
    t_end: f64,
    y_end: [f64; N],
    stopped: bool,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn final_state(&self) -> [f64; N] {
        self.y_end
    }

    /// True when the stop predicate ended the integration before the target.
    pub fn stopped(&self) -> bool {
        self.stopped
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    /// Interpolated state, `None` outside `[t_start, t_end]`.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if !(t >= self.t_start && t <= self.t_end) {
            return None;
        }
        if t == self.t_end {
            return Some(self.y_end);
        }
        if self.segments.is_empty() {
            return Some(self.y_start);
        }
        let k = self.segments.partition_point(|s| s.t0 <= t).max(1) - 1;
        Some(self.segments[k].eval(t))
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`.
///
/// `stop` is evaluated after each accepted step; returning true ends the
/// integration there.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]) -> bool,
{
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(HedgehogError::InvalidInput(format!("integration span [{t0}, {t1}] is empty")));
    }
    if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
        return Err(HedgehogError::invalid("rtol", opts.rtol, "tolerances must be positive"));
    }
    let span = t1 - t0;
    let mut h = opts
        .h_init
        .unwrap_or(if t0 > 0.0 { 0.1 * t0 } else { 0.01 * span })
        .min(span)
        .min(opts.h_max);
    let h_min = 1e-14 * t1.abs().max(1.0);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut segments = Vec::new();
    let mut steps = 0usize;

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(HedgehogError::NonConvergence {
                solver: "dopri5",
                iterations: steps,
                residual: t,
            });
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t1 } else { t + h };
        let k7 = f(t_new, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();

        if !err.is_finite() || err > 1.0 {
            let shrink = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= shrink;
            if h < h_min {
                return Err(HedgehogError::NonConvergence {
                    solver: "dopri5 (step size underflow)",
                    iterations: steps,
                    residual: t,
                });
            }
            continue;
        }

        let mut rc = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            rc[0][i] = y[i];
            rc[1][i] = ydiff;
            rc[2][i] = bspl;
            rc[3][i] = ydiff - h * k7[i] - bspl;
            rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        segments.push(Segment { t0: t, h, rc });
        t = t_new;
        y = y_new;
        k1 = k7;

        if stop(t, &y) {
            return Ok(Trajectory {
                t_start: t0,
                y_start: y0,
                segments,
                t_end: t,
                y_end: y,
                stopped: t < t1,
            });
        }
        let grow = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
        h = (h * grow).min(opts.h_max);
    }
    Ok(Trajectory {
        t_start: t0,
        y_start: y0,
        segments,
        t_end: t1,
        y_end: y,
        stopped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn never<const N: usize>(_: f64, _: &[f64; N]) -> bool {
        false
    }

    #[test]
    fn harmonic_oscillator_endpoint_and_dense_output() {
        let opts = OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let tr = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, &opts, never).unwrap();
        let [s, c] = tr.final_state();
        assert_abs_diff_eq!(s, 10f64.sin(), epsilon = 1e-10);
        assert_abs_diff_eq!(c, 10f64.cos(), epsilon = 1e-10);
        for i in 0..=1000 {
            let t = 10.0 * i as f64 / 1000.0;
            let y = tr.eval(t).unwrap();
            assert_abs_diff_eq!(y[0], t.sin(), epsilon = 1e-9);
            assert_abs_diff_eq!(y[1], t.cos(), epsilon = 1e-9);
        }
        assert!(tr.eval(10.5).is_none());
        assert!(tr.eval(-0.1).is_none());
    }

    #[test]
    fn dense_output_is_fourth_order_between_steps() {
        // fixed large steps: interpolation error scales like h^5
        let run = |h: f64| {
            let opts = OdeOptions {
                rtol: 1e3,
                atol: 1e3,
                h_init: Some(h),
                h_max: h,
                ..Default::default()
            };
            let tr = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, &opts, never).unwrap();
            (0..100)
                .map(|i| {
                    let t = (i as f64 + 0.37) / 100.0;
                    (tr.eval(t).unwrap()[0] - t.exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        let order = (e1 / e2).log2();
        assert!(order > 3.8, "observed order {order}");
    }

    #[test]
    fn stop_predicate_truncates() {
        let tr = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            100.0,
            &OdeOptions::default(),
            |_, y| y[0] > 1e3,
        )
        .unwrap();
        assert!(tr.stopped());
        assert!(tr.t_end() < 100.0);
        assert!(tr.final_state()[0] > 1e3);
        assert_abs_diff_eq!(tr.final_state()[0].ln(), tr.t_end(), epsilon = 1e-7);
    }

    #[test]
    fn singular_start_away_from_origin() {
        // y'' + 2 y'/r - 6 y / r^2 = 0 has solution r^2
        let r0 = 1e-3;
        let tr = integrate(
            |r, y: &[f64; 2]| [y[1], -2.0 * y[1] / r + 6.0 * y[0] / (r * r)],
            r0,
            [r0 * r0, 2.0 * r0],
            2.0,
            &OdeOptions::default(),
            never,
        )
        .unwrap();
        assert_abs_diff_eq!(tr.final_state()[0], 4.0, epsilon = 1e-7);
        assert_abs_diff_eq!(tr.eval(1.0).unwrap()[1], 2.0, epsilon = 1e-7);
    }

    #[test]
    fn rejects_empty_span() {
        assert!(integrate(|_, y: &[f64; 1]| *y, 1.0, [1.0], 1.0, &OdeOptions::default(), never).is_err());
    }
}
