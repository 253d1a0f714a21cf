//! Profile CSV, SVG plots and file checksums.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use hedgehog_core::diagnostics::ode_residual;
use hedgehog_core::{Provenance, RadialGrid, RadialProfile};
use sha2::{Digest, Sha256};

pub const PROFILE_HEADER: [&str; 4] = ["r", "h", "h_prime", "ode_residual"];

/// 17 significant digits: parses back to the same double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `r, h, h_prime, ode_residual`; the residual is empty at the two
/// endpoints where it is undefined.
pub fn write_profile_csv(path: &Path, p: &RadialProfile, t: f64) -> anyhow::Result<()> {
    let res = ode_residual(p, t)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(PROFILE_HEADER)?;
    let n = p.grid().intervals();
    for j in 0..=n {
        let residual = if j == 0 || j == n { String::new() } else { fmt_f64(res[j - 1]) };
        w.write_record([fmt_f64(p.r()[j]), fmt_f64(p.h()[j]), fmt_f64(p.h1()[j]), residual])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a profile CSV. Errors name the offending line.
pub fn read_profile_csv(path: &Path) -> anyhow::Result<RadialProfile> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = rdr.headers().with_context(|| format!("{}: line 1: unreadable header", path.display()))?;
    if header.len() < 3 || header.iter().take(3).ne(PROFILE_HEADER.iter().take(3).copied()) {
        bail!("{}: line 1: expected header r,h,h_prime[,ode_residual]", path.display());
    }
    let (mut r, mut h, mut h1) = (Vec::new(), Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.with_context(|| format!("{}: malformed row", path.display()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> anyhow::Result<f64> {
            let s = record.get(i).unwrap_or("").trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .with_context(|| format!("{}: line {line}: column {}: not a number: {s:?}", path.display(), PROFILE_HEADER[i]))
        };
        r.push(field(0)?);
        h.push(field(1)?);
        h1.push(field(2)?);
    }
    if let Some(i) = (1..r.len()).find(|&i| r[i] <= r[i - 1]) {
        // data rows start on line 2
        bail!("{}: line {}: r is not strictly increasing", path.display(), i + 2);
    }
    if r.first() != Some(&0.0) {
        bail!("{}: line 2: grid must start at r = 0", path.display());
    }
    let grid = RadialGrid::from_nodes(r).with_context(|| format!("{}: invalid grid", path.display()))?;
    Ok(RadialProfile::new(grid, h, h1, Provenance::external())?)
}

/// Line chart of `h` against `r` with a dashed `h_plus` reference line.
pub fn profile_svg(p: &RadialProfile, h_plus: f64, title: &str) -> String {
    let (width, height, margin) = (640.0, 400.0, 60.0);
    let radius = p.radius();
    let top = 1.1 * h_plus;
    let x = |r: f64| margin + (width - 2.0 * margin) * r / radius;
    let y = |h: f64| height - margin - (height - 2.0 * margin) * h / top;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        width / 2.0
    );
    // axes
    let _ = writeln!(
        s,
        r#"<polyline points="{},{} {},{} {},{}" fill="none" stroke="black"/>"#,
        x(0.0),
        y(top),
        x(0.0),
        y(0.0),
        x(radius),
        y(0.0)
    );
    for k in 0..=4 {
        let r = radius * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{r:.3}</text>"#,
            x(r),
            y(0.0) + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">r</text>"#,
        width / 2.0,
        height - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">h(r)</text>"#,
        height / 2.0,
        height / 2.0
    );
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="6,4"/>"##,
        x(0.0),
        y(h_plus),
        x(radius),
        y(h_plus)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">h+ = {h_plus:.4}</text>"#,
        x(radius),
        y(h_plus) - 6.0
    );
    let points: Vec<String> = p
        .r()
        .iter()
        .zip(p.h())
        .map(|(&r, &h)| format!("{:.2},{:.2}", x(r), y(h)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        points.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
