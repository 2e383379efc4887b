//! Grid evaluation, zero crossings and noise-region boundaries.

use std::collections::HashMap;

use bellfringe::model::{thermal_from_spectrum, thermal_window};
use bellfringe::noise::{assemble_mixture, half_range_hermite, mixture_deltas, DEFAULT_QUADRATURE_ORDER};
use bellfringe::{
    blur_visibility, delta_mixture_with, ground_state, MixtureOptions, ModelParams64, Moments64, Rotation,
    Spectrum64, StateEnsemble64, WitnessReport64,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{self, SpectrumCache};
use crate::config::{Mode, ScanSpec};
use crate::error::CliError;

/// Visibilities below this give an error marker instead of witness values.
pub const MIN_VISIBILITY: f64 = 1e-6;
/// Bracket width at which crossing refinement stops.
pub const CROSSING_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    AParam,
    BParam,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::AParam => "a_param",
            Column::BParam => "b_param",
        }
    }

    pub fn of(self, report: &WitnessReport64) -> f64 {
        match self {
            Column::AParam => report.a_param,
            Column::BParam => report.b_param,
        }
    }
}

impl std::str::FromStr for Column {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "a_param" => Ok(Column::AParam),
            "b_param" => Ok(Column::BParam),
            _ => Err(CliError::Config(format!("unknown column '{s}' (expected a_param or b_param)"))),
        }
    }
}

/// Quadrature bookkeeping of a δ-averaged row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureInfo {
    /// Nodes on the half line.
    pub order: usize,
    /// Graded composite rule instead of the half-range Gauss rule.
    pub graded: bool,
    /// `None` when the node-doubling check was not run.
    pub converged: Option<bool>,
    pub max_relative_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub noise_value: f64,
    /// Visibility actually entering the witness (blurred in blurred mode).
    pub nu: Option<f64>,
    pub report: Option<WitnessReport64>,
    pub error: Option<String>,
    pub quadrature: Option<QuadratureInfo>,
}

impl ScanRow {
    pub fn value(&self, column: Column) -> Option<f64> {
        self.report.as_ref().map(|r| column.of(r))
    }
}

/// Everything needed to evaluate grid points.
#[derive(Debug, Clone)]
pub struct Scanner {
    pub spec: ScanSpec,
    pub cache: Option<SpectrumCache>,
}

struct Point {
    moments: Moments64,
    quadrature: Option<QuadratureInfo>,
}

impl Scanner {
    pub fn new(spec: ScanSpec) -> Self {
        Self { spec, cache: None }
    }

    pub fn with_cache(mut self, cache: Option<SpectrumCache>) -> Self {
        self.cache = cache;
        self
    }

    fn rotation(&self, lambda: f64) -> Rotation {
        if self.spec.no_rotation {
            Rotation::None
        } else {
            Rotation::for_interaction(lambda)
        }
    }

    fn order(&self) -> usize {
        self.spec.quadrature_order.unwrap_or(DEFAULT_QUADRATURE_ORDER)
    }

    fn spectrum(&self, params: &ModelParams64, window: f64) -> Result<Spectrum64, CliError> {
        match &self.cache {
            Some(c) => c.get_or_compute(params, window),
            None => cache::compute(params, window),
        }
    }

    /// Temperatures, tilt widths and blur widths of one `Λ` column; the
    /// axis varies one of them.
    fn channels(&self, noise: f64) -> (f64, f64, f64) {
        let b = self.spec.background();
        match self.spec.mode {
            Mode::GroundState => (b.temperature, b.sigma_delta, 0.0),
            Mode::Thermal => (noise, b.sigma_delta, 0.0),
            Mode::DeltaMixture => (b.temperature, noise, 0.0),
            Mode::Blurred => (b.temperature, b.sigma_delta, noise),
        }
    }

    /// Rows for every noise value at one `Λ`. Spectra are computed once per
    /// column for the hottest temperature and shared by the colder ones.
    pub fn evaluate_column(&self, lambda: f64, noise_values: &[f64]) -> Vec<ScanRow> {
        let params = match ModelParams64::new(self.spec.n, lambda, 0.0) {
            Ok(p) => p,
            Err(e) => return noise_values.iter().map(|&v| error_row(lambda, v, e.to_string())).collect(),
        };
        let hottest = noise_values.iter().map(|&v| self.channels(v).0).fold(0.0, f64::max);
        // spectra per tilt width; a width of 0 holds the single δ = 0 spectrum
        let mut shared: HashMap<u64, Result<Vec<Spectrum64>, String>> = HashMap::new();
        noise_values
            .iter()
            .map(|&v| {
                let (t, sigma_delta, sigma_det) = self.channels(v);
                let point = if t > 0.0 && sigma_delta > 0.0 {
                    let spectra = shared
                        .entry(sigma_delta.to_bits())
                        .or_insert_with(|| self.node_spectra(&params, sigma_delta, hottest));
                    match spectra {
                        Ok(s) => self.combined(s, sigma_delta, t),
                        Err(e) => Err(CliError::Config(e.clone())),
                    }
                } else if t > 0.0 {
                    let spectra = shared.entry(0).or_insert_with(|| {
                        self.spectrum(&params, thermal_window(hottest)).map(|s| vec![s]).map_err(|e| e.to_string())
                    });
                    match spectra {
                        Ok(s) => thermal_from_spectrum(&s[0], t)
                            .map(|e| Point { moments: e.moments(), quadrature: None })
                            .map_err(CliError::from),
                        Err(e) => Err(CliError::Config(e.clone())),
                    }
                } else {
                    self.cold_point(&params, sigma_delta)
                };
                match point {
                    Ok(p) => self.row(lambda, v, p, sigma_det),
                    Err(e) => error_row(lambda, v, error_text(&e)),
                }
            })
            .collect()
    }

    /// One grid point evaluated from scratch.
    pub fn evaluate_point(&self, lambda: f64, noise_value: f64) -> ScanRow {
        self.evaluate_column(lambda, &[noise_value]).remove(0)
    }

    fn cold_point(&self, params: &ModelParams64, sigma_delta: f64) -> Result<Point, CliError> {
        if sigma_delta == 0.0 {
            let gs = ground_state(params)?;
            return Ok(Point { moments: gs.state.moments(), quadrature: None });
        }
        let options = MixtureOptions { order: self.order(), ..MixtureOptions::default() };
        let m = delta_mixture_with(params.n, params.lambda, sigma_delta, 0.0, options)?;
        Ok(Point {
            moments: m.moments(),
            quadrature: Some(QuadratureInfo {
                order: m.order,
                graded: m.graded,
                converged: Some(m.converged),
                max_relative_change: Some(m.max_relative_change),
            }),
        })
    }

    fn node_spectra(&self, params: &ModelParams64, sigma_delta: f64, hottest: f64) -> Result<Vec<Spectrum64>, String> {
        let rule = half_range_hermite::<f64>(self.order()).map_err(|e| e.to_string())?;
        mixture_deltas(&rule, sigma_delta)
            .into_iter()
            .map(|d| self.spectrum(&params.with_delta(d), thermal_window(hottest)).map_err(|e| e.to_string()))
            .collect()
    }

    /// δ average of thermal states (both channels at once); no node-doubling check.
    fn combined(&self, spectra: &[Spectrum64], sigma_delta: f64, t: f64) -> Result<Point, CliError> {
        let rule = half_range_hermite::<f64>(self.order())?;
        debug_assert_eq!(mixture_deltas(&rule, sigma_delta).len(), spectra.len());
        let nodes: Vec<StateEnsemble64> =
            spectra.iter().map(|s| thermal_from_spectrum(s, t)).collect::<Result<_, _>>()?;
        let ensemble = assemble_mixture(&rule, &nodes)?;
        Ok(Point {
            moments: ensemble.moments(),
            quadrature: Some(QuadratureInfo { order: rule.len(), graded: false, converged: None, max_relative_change: None }),
        })
    }

    fn row(&self, lambda: f64, noise_value: f64, point: Point, sigma_detector: f64) -> ScanRow {
        let rotation = self.rotation(lambda);
        let n = self.spec.n;
        let rotated = rotation.apply(&point.moments);
        let nu = bellfringe::witness::visibility(&rotated, n);
        let nu = if sigma_detector > 0.0 { blur_visibility(nu, self.spec.k_fringe, sigma_detector) } else { nu };
        let mut row = ScanRow { lambda, noise_value, nu: Some(nu), report: None, error: None, quadrature: point.quadrature };
        if nu < MIN_VISIBILITY {
            row.error = Some(format!("visibility {nu:e} below {MIN_VISIBILITY:e}"));
            return row;
        }
        let result = bellfringe::witness::phase_squeezing(&rotated, n)
            .and_then(|xi2| WitnessReport64::from_parts(xi2, nu, n, rotation == Rotation::HalfPiAboutX));
        match result {
            Ok(r) => row.report = Some(r),
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

fn error_text(e: &CliError) -> String {
    match e {
        CliError::Compute(inner) => inner.to_string(),
        CliError::Config(s) => s.clone(),
        other => other.to_string(),
    }
}

fn error_row(lambda: f64, noise_value: f64, error: String) -> ScanRow {
    ScanRow { lambda, noise_value, nu: None, report: None, error: Some(error), quadrature: None }
}

/// Evaluates the whole grid, `Λ` outer and noise inner. Columns run in
/// parallel; the output order never depends on scheduling.
pub fn run_scan(scanner: &Scanner) -> Vec<ScanRow> {
    let noise = scanner.spec.noise_values();
    scanner
        .spec
        .lambdas()
        .par_iter()
        .map(|&lambda| scanner.evaluate_column(lambda, &noise))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Sign changes of `column` along `Λ` at one noise value, each refined by
/// bisection with fresh evaluations until the bracket is `≤ 1e-4` wide.
pub fn find_zero_crossing(scanner: &Scanner, rows: &[ScanRow], column: Column, noise_value: f64) -> Vec<f64> {
    let line: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.noise_value == noise_value)
        .filter_map(|r| r.value(column).map(|v| (r.lambda, v)))
        .collect();
    let brackets: Vec<(f64, f64, f64)> = line
        .windows(2)
        .filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
        .map(|w| (w[0].0, w[1].0, w[0].1))
        .collect();
    brackets
        .into_par_iter()
        .filter_map(|(mut lo, mut hi, f_lo)| {
            while (hi - lo).abs() > CROSSING_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                let f_mid = scanner.evaluate_point(mid, noise_value).value(column)?;
                if (f_mid < 0.0) == (f_lo < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub lambda: f64,
    pub noise_value: f64,
}

/// For each `Λ`, the first noise value at which `B` changes sign, linearly
/// interpolated between grid neighbors. `Λ` values without a change are skipped.
pub fn extract_region_boundary(rows: &[ScanRow], noise_values: &[f64]) -> Result<Vec<BoundaryPoint>, CliError> {
    let width = noise_values.len();
    if width == 0 || !rows.len().is_multiple_of(width) {
        return Err(CliError::Config("scan rows do not form a rectangular grid".into()));
    }
    let mut out = Vec::new();
    for column in rows.chunks(width) {
        if column.iter().zip(noise_values).any(|(r, &v)| r.noise_value != v || r.lambda != column[0].lambda) {
            return Err(CliError::Config("scan rows do not form a rectangular grid".into()));
        }
        let found = column.windows(2).find_map(|w| {
            let (a, b) = (w[0].value(Column::BParam)?, w[1].value(Column::BParam)?);
            if (a < 0.0) == (b < 0.0) {
                return None;
            }
            let t = a / (a - b);
            Some(w[0].noise_value + t * (w[1].noise_value - w[0].noise_value))
        });
        if let Some(noise_value) = found {
            out.push(BoundaryPoint { lambda: column[0].lambda, noise_value });
        }
    }
    Ok(out)
}
