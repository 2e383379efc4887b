//! CSV and JSON emission. Numbers are written with 17 significant digits
//! and nothing run-dependent (time, host, thread count) enters the files,
//! so equal specs give byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::ScanSpec;
use crate::error::CliError;
use crate::scan::{BoundaryPoint, QuadratureInfo, ScanRow};

pub const CSV_HEADER: &str = "lambda,noise_value,nu,xi2,a_param,b_param,theta0,interior_minimum,rotated,var_phi,error";

pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

/// Quotes a CSV field when needed.
fn text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace(['\n', '\r'], " "))
    } else {
        s.to_string()
    }
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::with_capacity(64 + 200 * rows.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let r = row.report.as_ref();
        let fields = [
            number(row.lambda),
            number(row.noise_value),
            opt(row.nu),
            opt(r.map(|r| r.xi2)),
            opt(r.map(|r| r.a_param)),
            opt(r.map(|r| r.b_param)),
            opt(r.map(|r| r.theta0)),
            r.map(|r| r.interior_minimum.to_string()).unwrap_or_default(),
            r.map(|r| r.rotated.to_string()).unwrap_or_default(),
            opt(r.map(|r| r.var_phi)),
            text(row.error.as_deref().unwrap_or("")),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct JsonRow<'a> {
    lambda: f64,
    noise_value: f64,
    nu: Option<f64>,
    xi2: Option<f64>,
    a_param: Option<f64>,
    b_param: Option<f64>,
    theta0: Option<f64>,
    interior_minimum: Option<bool>,
    rotated: Option<bool>,
    var_phi: Option<f64>,
    error: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<QuadratureInfo>,
}

#[derive(Debug, Serialize)]
struct ScanDocument<'a> {
    spec: &'a ScanSpec,
    library_version: &'a str,
    seed: u64,
    /// Several noise channels combined.
    extension: bool,
    rows: Vec<JsonRow<'a>>,
}

pub fn scan_json(spec: &ScanSpec, rows: &[ScanRow]) -> Result<String, CliError> {
    let doc = ScanDocument {
        spec,
        library_version: bellfringe::VERSION,
        seed: spec.seed,
        extension: spec.is_extension(),
        rows: rows
            .iter()
            .map(|row| {
                let r = row.report.as_ref();
                JsonRow {
                    lambda: row.lambda,
                    noise_value: row.noise_value,
                    nu: row.nu,
                    xi2: r.map(|r| r.xi2),
                    a_param: r.map(|r| r.a_param),
                    b_param: r.map(|r| r.b_param),
                    theta0: r.map(|r| r.theta0),
                    interior_minimum: r.map(|r| r.interior_minimum),
                    rotated: r.map(|r| r.rotated),
                    var_phi: r.map(|r| r.var_phi),
                    error: row.error.as_deref(),
                    quadrature: row.quadrature,
                }
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Reads the spec back out of a scan JSON document.
pub fn spec_from_scan_json(text: &str) -> Result<ScanSpec, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let spec = value.get("spec").ok_or_else(|| CliError::Config("document has no spec".into()))?;
    Ok(serde_json::from_value(spec.clone())?)
}

/// Boundary table; `analytic` holds the large-N prediction where one exists.
pub fn boundary_csv(points: &[BoundaryPoint], analytic: &[Option<f64>]) -> String {
    let mut out = String::from("lambda,noise_boundary,analytic\n");
    for (p, a) in points.iter().zip(analytic) {
        let _ = writeln!(out, "{},{},{}", number(p.lambda), number(p.noise_value), opt(*a));
    }
    out
}

pub fn crossings_csv(column: &str, found: &[(f64, Vec<f64>)]) -> String {
    let mut out = String::from("column,noise_value,lambda\n");
    for (noise, lambdas) in found {
        for l in lambdas {
            let _ = writeln!(out, "{column},{},{}", number(*noise), number(*l));
        }
    }
    out
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents.as_bytes())?;
    Ok(())
}
