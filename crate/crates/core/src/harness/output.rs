use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::fit::FitReport;
use super::sweep::{AnalyticFailure, BerCurve, CurveMetadata};
use crate::energy::HistogramBin;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "eb_n0_db,method,ber,ci_half_width,n_bits,n_errors,map,beta,n_relays,seed";

/// 17 significant digits: enough to round-trip any f64.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// The curve as CSV text. Contains nothing run-dependent beyond the
/// results, so equal runs give equal bytes.
pub fn curve_csv(curve: &BerCurve) -> String {
    let m = &curve.metadata;
    let mut out = String::with_capacity(128 * (curve.points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            float(r.point.eb_n0_db),
            r.point.method.as_str(),
            float(r.point.ber),
            opt(r.ci_half_width.map(float)),
            opt(r.n_bits),
            opt(r.n_errors),
            m.map,
            m.beta,
            m.n_relays,
            m.seed,
        );
    }
    out
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_left,bin_right,density\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", float(b.left), float(b.right), float(b.density));
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn write_curve_csv(curve: &BerCurve, path: &Path) -> Result<()> {
    write_text(path, &curve_csv(curve))
}

pub fn write_histogram_csv(bins: &[HistogramBin], path: &Path) -> Result<()> {
    write_text(path, &histogram_csv(bins))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(path, &text)
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    metadata: &'a CurveMetadata,
    failures: &'a [AnalyticFailure],
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_report: Option<&'a FitReport>,
}

/// Sidecar JSON for a sweep: resolved config, fingerprint, timestamps, the
/// fit behind the analytic rows and any analytic failures. Kept out of the
/// CSV so the CSV stays byte-stable.
pub fn write_run_metadata(curve: &BerCurve, fit_report: Option<&FitReport>, path: &Path) -> Result<()> {
    write_json(
        &RunMetadata { metadata: &curve.metadata, failures: &curve.failures, fit_report },
        path,
    )
}
