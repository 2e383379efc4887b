//! `mc-verify`: Monte-Carlo check of the fitted-phase variance.

use bellfringe::fringe::{verify_sensitivity, FitMode, FringeParams};
use bellfringe::SensitivityReport;
use serde::Serialize;

use crate::config::{McBlock, McFitMode, ScanSpec};
use crate::error::CliError;
use crate::output::number;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRow {
    pub xi2: f64,
    pub nu: f64,
    pub n_atoms: usize,
    pub n_shots: usize,
    pub failed_shots: usize,
    pub empirical_variance: f64,
    pub predicted_variance: f64,
    pub ratio: f64,
    pub bias: f64,
    pub bias_standard_error: f64,
}

impl McRow {
    fn new(xi2: f64, nu: f64, n_atoms: usize, r: &SensitivityReport) -> Self {
        Self {
            xi2,
            nu,
            n_atoms,
            n_shots: r.n_shots,
            failed_shots: r.failed_shots,
            empirical_variance: r.empirical_variance,
            predicted_variance: r.predicted_variance,
            ratio: r.ratio(),
            bias: r.bias,
            bias_standard_error: r.bias_standard_error,
        }
    }
}

/// Runs every `(ξ², ν)` point of the block; point `i` uses seed `seed + i`.
pub fn run_mc(block: &McBlock, k_fringe: f64, seed: u64) -> Result<Vec<McRow>, CliError> {
    block
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let params = FringeParams::new(p.nu, block.phi, k_fringe, block.n_atoms, block.n_periods)?;
            let mode = match block.fit {
                McFitMode::Free => FitMode::FreeVisibility,
                McFitMode::Fixed => FitMode::FixedVisibility(p.nu),
            };
            let report = verify_sensitivity(&params, p.xi2, block.n_shots, seed.wrapping_add(i as u64), mode)?;
            Ok(McRow::new(p.xi2, p.nu, block.n_atoms, &report))
        })
        .collect()
}

pub fn mc_csv(rows: &[McRow]) -> String {
    let mut out = String::from(
        "xi2,nu,n_atoms,n_shots,failed_shots,empirical_variance,predicted_variance,ratio,bias,bias_standard_error\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            number(r.xi2),
            number(r.nu),
            r.n_atoms,
            r.n_shots,
            r.failed_shots,
            number(r.empirical_variance),
            number(r.predicted_variance),
            number(r.ratio),
            number(r.bias),
            number(r.bias_standard_error)
        ));
    }
    out
}

#[derive(Serialize)]
struct McDocument<'a> {
    spec: &'a ScanSpec,
    library_version: &'a str,
    seed: u64,
    rows: &'a [McRow],
}

pub fn mc_json(spec: &ScanSpec, rows: &[McRow]) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&McDocument {
        spec,
        library_version: bellfringe::VERSION,
        seed: spec.seed,
        rows,
    })?;
    s.push('\n');
    Ok(s)
}
