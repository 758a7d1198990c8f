use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{FitMode, FitResult, SweepRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "h,chi,L,xi,lambda1,E_asym,E_finite,E1,nu2_abs";

/// Everything written by [`emit_report`].
#[derive(Clone, Debug)]
pub struct Report<'a> {
    pub records: &'a [SweepRecord],
    pub fit: Option<&'a FitResult>,
    /// Chooses the plotted columns: `(ξ, E_asym)` or `(L, E₁)`.
    pub mode: FitMode,
    pub violations: usize,
}

#[derive(Clone, Debug)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub json: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    c_est: Option<f64>,
    r2: Option<f64>,
    n_points: usize,
    violations: usize,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV text with the fixed header; `f64` fields use the shortest
/// representation that parses back to the same value.
pub fn write_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.h,
            r.chi,
            opt(r.l),
            opt(r.xi),
            r.lambda1,
            r.e_asym,
            opt(r.e_finite),
            opt(r.e1),
            r.nu2_abs
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(Error::InvalidInput(format!("unexpected CSV header {other:?}"))),
    }
    let bad = |n: usize, what: &str| Error::InvalidInput(format!("CSV line {n}: {what}"));
    let mut out = Vec::new();
    for (i, line) in lines.enumerate().map(|(i, l)| (i + 2, l)) {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(i, &format!("{} fields, expected 9", f.len())));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(i, &format!("bad number {:?}", f[k])));
        let optf = |k: usize| if f[k].is_empty() { Ok(None) } else { num(k).map(Some) };
        let int = |k: usize| f[k].parse::<usize>().map_err(|_| bad(i, &format!("bad integer {:?}", f[k])));
        out.push(SweepRecord {
            h: num(0)?,
            chi: int(1)?,
            l: if f[2].is_empty() { None } else { Some(int(2)?) },
            xi: optf(3)?,
            lambda1: num(4)?,
            e_asym: num(5)?,
            e_finite: optf(6)?,
            e1: optf(7)?,
            nu2_abs: num(8)?,
        });
    }
    Ok(out)
}

fn points(records: &[SweepRecord], mode: FitMode) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter_map(|r| match mode {
            FitMode::OffCritical => r.xi.map(|x| (x, r.e_asym)),
            FitMode::Critical => r.l.zip(r.e1).map(|(l, e)| (l as f64, e)),
        })
        .filter(|(x, y)| *x > 0.0 && x.is_finite() && y.is_finite())
        .collect()
}

/// Scatter of `y` against `ln x` with the fitted line, if any.
fn render_svg(pts: &[(f64, f64)], fit: Option<&FitResult>, mode: FitMode) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        (lo - pad, hi + pad)
    };
    let (x0, x1) = span(&lx);
    let (y0, y1) = span(&ys);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let (xl, yl) = match mode {
        FitMode::OffCritical => ("ln xi", "E_asym"),
        FitMode::Critical => ("ln L", "E1"),
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<polyline points="{PAD},{PAD} {PAD},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xl}</text>"#, W / 2.0, H - 20.0);
    let _ = writeln!(s, r#"<text x="20" y="{}" transform="rotate(-90 20 {})" text-anchor="middle">{yl}</text>"#, H / 2.0, H / 2.0);
    for v in [(x0, y0), (x1, y1)] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" font-size="11" text-anchor="middle">{:.3}</text>"#, sx(v.0), H - PAD + 16.0, v.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" font-size="11" text-anchor="end">{:.4}</text>"#, PAD - 4.0, sy(v.1), v.1);
    }
    for (x, y) in lx.iter().zip(&ys) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(*x), sy(*y));
    }
    if let Some(f) = fit {
        let ya = f.intercept + f.slope * x0;
        let yb = f.intercept + f.slope * x1;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick"/>"#,
            sx(x0),
            sy(ya),
            sx(x1),
            sy(yb)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12">c = {:.4}, r2 = {:.4}</text>"#,
            PAD + 10.0,
            PAD + 14.0,
            f.c_est,
            f.r2
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `records.csv`, `summary.json` and, when there is something to
/// plot, `plot.svg` into `out_dir`.
pub fn emit_report(report: &Report<'_>, out_dir: impl AsRef<Path>) -> Result<ReportPaths> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let csv = dir.join("records.csv");
    fs::write(&csv, write_csv(report.records))?;

    let summary = Summary {
        c_est: report.fit.map(|f| f.c_est),
        r2: report.fit.map(|f| f.r2),
        n_points: report.fit.map_or(0, |f| f.n_points),
        violations: report.violations,
    };
    let json = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&json, text)?;

    let pts = points(report.records, report.mode);
    let svg = if pts.is_empty() {
        None
    } else {
        let p = dir.join("plot.svg");
        fs::write(&p, render_svg(&pts, report.fit, report.mode))?;
        Some(p)
    };
    Ok(ReportPaths { csv, svg, json })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(h: f64) -> SweepRecord {
        SweepRecord {
            h,
            chi: 32,
            l: Some(64),
            xi: Some(5.484_8 + h / 3.0),
            lambda1: 0.1 + 1.0 / 3.0,
            e_asym: -2.0 * (0.1f64 + 1.0 / 3.0).ln(),
            e_finite: None,
            e1: Some(1e-17 * h),
            nu2_abs: 0.8,
        }
    }

    #[test]
    fn header_is_exact() {
        assert_eq!(write_csv(&[]), "h,chi,L,xi,lambda1,E_asym,E_finite,E1,nu2_abs\n");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let recs = vec![rec(1.05), rec(std::f64::consts::PI), SweepRecord { l: None, xi: None, ..rec(1.0) }];
        let text = write_csv(&recs);
        assert_eq!(parse_csv(&text).unwrap(), recs);
        assert!(parse_csv("h,chi\n").is_err());
    }

    #[test]
    fn empty_report_has_no_plot() {
        let dir = tempfile::tempdir().unwrap();
        let r = Report { records: &[], fit: None, mode: FitMode::OffCritical, violations: 0 };
        let p = emit_report(&r, dir.path()).unwrap();
        assert!(p.svg.is_none());
        assert_eq!(fs::read_to_string(p.csv).unwrap(), format!("{CSV_HEADER}\n"));
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.json).unwrap()).unwrap();
        assert_eq!(v["violations"], 0);
    }

    #[test]
    fn plot_is_well_formed() {
        let recs = vec![rec(1.1), rec(1.2), rec(1.3)];
        let fit = crate::harness::fit_loglinear(&[1.0, 2.0], &[0.0, 1.0], FitMode::OffCritical).unwrap();
        let svg = render_svg(&points(&recs, FitMode::OffCritical), Some(&fit), FitMode::OffCritical);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(!svg.contains("NaN"));
    }
}
