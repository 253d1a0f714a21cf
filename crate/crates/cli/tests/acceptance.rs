//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! appear in the output.

// NaN must fail every check, hence `!(cond)` in `ensure!`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hedgehog_core::cauchy::{hedgehog_local_solution, hedgehog_problem, picard_iterates};
use hedgehog_core::diagnostics::{
    check_bounds, check_monotone, pohozaev_residual, second_variation_min, uniqueness_probe, UniquenessOptions,
};
use hedgehog_core::potential::{bulk_offset, g, g_prime, h_plus};
use hedgehog_core::profile::{
    discrete_gradient, energy, find_shooting_param, find_shooting_param_with, minimize_energy, ShootingOptions,
};
use hedgehog_core::qtensor::{el_rhs, uniaxial, UnitVector};
use hedgehog_core::{Provenance, RadialGrid, RadialProfile};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, check and runtime budget.
type Criterion = (&'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn critical_values() -> Outcome {
    for (t, expected) in [(0.0, 1.5), (1.0, 1.0), (9.0 / 8.0, 0.75)] {
        let hp = h_plus(t).unwrap();
        ensure!((hp - expected).abs() <= 1e-14, "h_plus({t}) = {hp}");
    }
    let c1 = bulk_offset(1.0).unwrap();
    ensure!(c1.abs() <= 1e-12, "bulk_offset(1) = {c1}");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        // (-20, 9/8]
        let t = 9.0 / 8.0 - rng.gen_range(0.0..1.0) * (20.0 + 9.0 / 8.0);
        let hp = h_plus(t).unwrap();
        let (v, d) = (g(hp, t).unwrap(), g_prime(hp, t).unwrap());
        ensure!(v.abs() <= 1e-12 && d.abs() <= 1e-12, "t = {t}: g = {v:e}, g' = {d:e}");
        worst = worst.max(v.abs()).max(d.abs());
    }
    Ok(format!("max |g|, |g'| at h_plus = {worst:.1e}"))
}

fn tensor_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let h = rng.gen_range(-3.0..3.0);
        let t = rng.gen_range(-20.0..9.0 / 8.0);
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = UnitVector::normalize(v + Vector3::new(0.0, 0.0, 1e-3)).unwrap();
        let lhs = el_rhs(&uniaxial(h, &n), t);
        let nn = n.vector() * n.vector().transpose() - Matrix3::identity() / 3.0;
        let rhs = nn * ((1.5f64).sqrt() * g_prime(h, t).unwrap());
        let err = (lhs.matrix() - rhs).abs().max();
        ensure!(err <= 1e-12, "h = {h}, t = {t}: entrywise error {err:e}");
        worst = worst.max(err);
    }
    Ok(format!("max entrywise error {worst:.1e}"))
}

fn picard_contraction() -> Outcome {
    let mut checks = 0;
    for t in [-8.0, -1.0, 0.5] {
        for a in [0.5, 1.0, 2.0] {
            let p = hedgehog_problem(t, a).unwrap();
            let eps = p.contraction_radius();
            let its = picard_iterates(&p, eps, 12, 20).unwrap();
            for i in 1..=50 {
                let r = eps * i as f64 / 50.0;
                for (n, w) in its.windows(2).enumerate() {
                    let gap = (w[1].eval(r) - w[0].eval(r)).abs();
                    let bound = p.gap_bound(n, r);
                    ensure!(gap <= bound * (1.0 + 1e-9), "t = {t}, a = {a}, n = {n}, r = {r}: {gap:e} > {bound:e}");
                    checks += 1;
                }
            }
            let sol = hedgehog_local_solution(t, a, eps, 1e-14).unwrap();
            let c4 = sol.series().unwrap().coefficient(4);
            ensure!((c4 - t * a / 14.0).abs() <= 1e-10, "t = {t}, a = {a}: r^4 coefficient {c4}");
        }
    }
    Ok(format!("{checks} gap checks within bound, r^4 coefficients exact"))
}

fn dual_solver_agreement() -> Outcome {
    let mut report = Vec::new();
    for (t, radius) in [(-8.0, 10.0), (-1.0, 5.0), (-0.1, 2.0)] {
        let shot = find_shooting_param(t, radius, 1e-10).unwrap();
        let grid = shot.profile.grid().clone();
        ensure!(grid.intervals() == 512, "grid has {} intervals", grid.intervals());
        let min = minimize_energy(t, radius, &grid, None, 1e-8, 500).unwrap();
        let d = shot.profile.sup_distance(&min).unwrap();
        ensure!(d <= 1e-4, "t = {t}, R = {radius}: max |dh| = {d:e}");
        report.push(format!("{d:.1e}"));
    }
    Ok(format!("max |dh| = {}", report.join(", ")))
}

fn gradient_correctness() -> Outcome {
    let (t, radius) = (-1.0, 5.0);
    let grid = RadialGrid::geometric(radius, 64, 4.0).unwrap();
    let hp = h_plus(t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let h: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|r| hp * (r / radius).powi(2) + if *r > 0.0 && *r < radius { rng.gen_range(-0.2..0.2) } else { 0.0 })
            .collect();
        let p = RadialProfile::from_values(grid.clone(), h.clone(), Provenance::external()).unwrap();
        let exact = discrete_gradient(&p, t).unwrap();
        let mut max_diff: f64 = 0.0;
        for j in 1..grid.intervals() {
            let step = 1e-6 * (1.0 + h[j].abs());
            let shifted = |s: f64| {
                let mut v = h.clone();
                v[j] += s;
                energy(&RadialProfile::from_values(grid.clone(), v, Provenance::external()).unwrap(), t).unwrap()
            };
            let fd = (shifted(step) - shifted(-step)) / (2.0 * step);
            max_diff = max_diff.max((fd - exact[j - 1]).abs());
        }
        let scale = exact.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let rel = max_diff / scale;
        ensure!(rel <= 1e-6, "relative error {rel:e}");
        worst = worst.max(rel);
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn certified_properties() -> Outcome {
    let mut min_sv = f64::INFINITY;
    for t in [-10.0, -1.0, -0.1] {
        for radius in [1.0, 5.0, 20.0] {
            let shot = find_shooting_param(t, radius, 1e-10).unwrap();
            let grid = shot.profile.grid().clone();
            let min = minimize_energy(t, radius, &grid, None, 1e-8, 500).unwrap();
            for (name, p) in [("shooting", &shot.profile), ("minimizer", &min)] {
                let case = format!("{name} t = {t}, R = {radius}");
                let b = check_bounds(p, t, 1e-8).unwrap();
                ensure!(b.ok && p.h().iter().all(|v| *v >= 0.0), "{case}: bound violation {:e}", b.max_violation);
                let m = check_monotone(p, 0.0);
                ensure!(m.min_slope > 0.0, "{case}: min slope {:e}", m.min_slope);
                ensure!(p.boundary_slope() > 0.0, "{case}: h'(R) = {}", p.boundary_slope());
                let sv = second_variation_min(p, t, 100, 0).unwrap();
                ensure!(sv >= -1e-8, "{case}: second variation {sv:e}");
                min_sv = min_sv.min(sv);
            }
        }
    }
    Ok(format!("18 profiles certified, min second variation {min_sv:.3}"))
}

fn pohozaev_certificate() -> Outcome {
    let mut report = Vec::new();
    for (t, radius) in [(-8.0, 10.0), (-1.0, 5.0), (-0.1, 2.0)] {
        let res: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&n| {
                let opts = ShootingOptions {
                    grid_nodes: n,
                    ..Default::default()
                };
                let shot = find_shooting_param_with(t, radius, 1e-10, &opts).unwrap();
                pohozaev_residual(&shot.profile, t).unwrap()
            })
            .collect();
        ensure!(res[2] <= 1e-4, "t = {t}, R = {radius}: residual {:e} at 512", res[2]);
        for w in res.windows(2) {
            let ratio = w[0] / w[1];
            ensure!((3.0..=5.0).contains(&ratio), "t = {t}, R = {radius}: residuals {res:?}");
        }
        report.push(format!("{:.1e} ({:.2}x, {:.2}x)", res[2], res[0] / res[1], res[1] / res[2]));
    }
    Ok(report.join("; "))
}

fn uniqueness() -> Outcome {
    let record = uniqueness_probe(-8.0, 10.0, 10, 0, &UniquenessOptions::default(), None).unwrap();
    ensure!(record.n_failed == 0, "{} minimizations failed", record.n_failed);
    ensure!(record.max_pairwise_profile_distance <= 1e-4, "max distance {:e}", record.max_pairwise_profile_distance);
    ensure!(record.shooting_root_count == 1, "{} shooting roots", record.shooting_root_count);
    Ok(format!(
        "11 profiles within {:.1e}, one root of h(R; a) - h_plus",
        record.max_pairwise_profile_distance
    ))
}

fn run_cli(args: &[&str], workers: Option<usize>) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hedgehog"));
    cmd.args(args);
    if let Some(w) = workers {
        cmd.env("HEDGEHOG_WORKERS", w.to_string());
    }
    let out = cmd.output().expect("hedgehog binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn verdicts(json: &serde_json::Value) -> Vec<serde_json::Value> {
    [
        "origin_ok",
        "bounds_ok",
        "monotone_ok",
        "boundary_slope_ok",
        "pohozaev_ok",
        "second_variation_ok",
    ]
    .iter()
    .map(|k| json[*k].clone())
    .collect()
}

fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let solve_dir = root.join("solve");
    let s = solve_dir.to_str().unwrap();
    let (code, _) = run_cli(&["solve", "--t", "-8", "--R", "10", "--out", s], None);
    ensure!(code == 0, "solve exited {code}");
    let stored: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(solve_dir.join("diagnostics.json")).unwrap()).unwrap();
    let profile = solve_dir.join("profile.csv");
    let (code, stdout) = run_cli(&["check", "--profile", profile.to_str().unwrap(), "--t", "-8"], None);
    ensure!(code == 0, "check exited {code}");
    let checked: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    ensure!(verdicts(&stored) == verdicts(&checked), "verdicts differ: {stored} vs {checked}");
    for key in ["pohozaev_residual", "second_variation_min", "min_slope", "boundary_slope"] {
        ensure!(stored[key] == checked[key], "{key} differs: {} vs {}", stored[key], checked[key]);
    }

    let summary = |w: usize| -> Result<Vec<u8>, String> {
        let out = root.join(format!("sweep{w}"));
        let (code, _) = run_cli(
            &["sweep", "--t-list", "-10,-1,-0.1", "--R-list", "1,5,20", "--out", out.to_str().unwrap()],
            Some(w),
        );
        ensure!(code == 0, "sweep with {w} workers exited {code}");
        Ok(std::fs::read(Path::new(&out).join("summary.csv")).unwrap())
    };
    let base = summary(1)?;
    for w in [4, 8] {
        ensure!(summary(w)? == base, "summary with {w} workers differs from 1 worker");
    }
    let rows = String::from_utf8(base).unwrap().lines().count() - 1;
    Ok(format!("round-trip verdicts identical; {rows}-row summary byte-identical for 1, 4, 8 workers"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("critical-value exactness", critical_values, Duration::from_secs(1)),
        ("tensor/radial consistency", tensor_consistency, Duration::from_secs(1)),
        ("Picard contraction", picard_contraction, Duration::from_secs(5)),
        ("dual-solver agreement", dual_solver_agreement, Duration::from_secs(60)),
        ("gradient correctness", gradient_correctness, Duration::from_secs(10)),
        ("certified properties", certified_properties, Duration::from_secs(120)),
        ("Pohozaev certificate", pohozaev_certificate, Duration::from_secs(30)),
        ("uniqueness below the spinodal", uniqueness, Duration::from_secs(120)),
        ("CLI contract", cli_contract, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
