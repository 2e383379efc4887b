//! Scan specification, read from JSON.

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Spacing below which two grid values count as equal.
const GRID_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    /// `start, start + step, ..., stop` (inclusive when `stop` falls on the grid).
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let values = match *self {
            Grid::Range { start, stop, step } => {
                if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                    return Err(CliError::Config(format!("bad range {start}..{stop} step {step}")));
                }
                let count = ((stop - start) / step + GRID_EPS.sqrt()).floor() as usize + 1;
                (0..count).map(|i| start + step * i as f64).collect()
            }
            Grid::List(ref v) => v.clone(),
        };
        if values.is_empty() {
            return Err(CliError::Config("empty grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("grid values must be finite".into()));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0] + GRID_EPS);
        let decreasing = values.windows(2).all(|w| w[1] < w[0] - GRID_EPS);
        if !(increasing || decreasing) {
            return Err(CliError::Config("grid must be strictly monotone".into()));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    SigmaDelta,
    Temperature,
    SigmaDetector,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::SigmaDelta => "sigma_delta",
            NoiseKind::Temperature => "temperature",
            NoiseKind::SigmaDetector => "sigma_detector",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseAxis {
    pub kind: NoiseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    GroundState,
    Thermal,
    DeltaMixture,
    Blurred,
}

impl Mode {
    fn axis(self) -> NoiseKind {
        match self {
            Mode::GroundState => NoiseKind::None,
            Mode::Thermal => NoiseKind::Temperature,
            Mode::DeltaMixture => NoiseKind::SigmaDelta,
            Mode::Blurred => NoiseKind::SigmaDetector,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Noise held fixed underneath the scanned axis. Nonzero values combine
/// channels beyond the single-channel cases and mark the output as an extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Background {
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub sigma_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum McFitMode {
    #[default]
    Free,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McPoint {
    pub xi2: f64,
    pub nu: f64,
}

/// Monte-Carlo fringe-fit settings for `mc-verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub n_atoms: usize,
    pub n_shots: usize,
    #[serde(default = "default_periods")]
    pub n_periods: usize,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub fit: McFitMode,
    pub points: Vec<McPoint>,
}

fn default_periods() -> usize {
    bellfringe::fringe::DEFAULT_PERIODS
}

fn default_k() -> f64 {
    1.0
}

fn default_outputs() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
    pub lambda_grid: Grid,
    #[serde(default)]
    pub noise_axis: NoiseAxis,
    #[serde(default = "default_k")]
    pub k_fringe: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputFormat>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_block: Option<McBlock>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub no_rotation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<Background>,
    /// Half-range quadrature order of the δ average.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_order: Option<usize>,
}

impl ScanSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: ScanSpec = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::Config("N must be positive".into()));
        }
        self.lambda_grid.values()?;
        if self.noise_axis.kind != self.mode.axis() {
            return Err(CliError::Config(format!(
                "mode {:?} needs noise axis {}, got {}",
                self.mode,
                self.mode.axis().name(),
                self.noise_axis.kind.name()
            )));
        }
        match (&self.noise_axis.kind, &self.noise_axis.grid) {
            (NoiseKind::None, Some(_)) => return Err(CliError::Config("noise axis 'none' takes no grid".into())),
            (NoiseKind::None, None) => {}
            (_, None) => return Err(CliError::Config("noise axis needs a grid".into())),
            (_, Some(g)) => {
                if g.values()?.iter().any(|&v| v < 0.0) {
                    return Err(CliError::Config("noise values must be nonnegative".into()));
                }
            }
        }
        if !(self.k_fringe > 0.0 && self.k_fringe.is_finite()) {
            return Err(CliError::Config("k_fringe must be positive".into()));
        }
        if self.outputs.is_empty() {
            return Err(CliError::Config("no output format selected".into()));
        }
        if let Some(b) = self.background {
            if !(b.temperature >= 0.0 && b.sigma_delta >= 0.0) {
                return Err(CliError::Config("background noise must be nonnegative".into()));
            }
            if self.mode == Mode::Thermal && b.temperature > 0.0 {
                return Err(CliError::Config("background temperature conflicts with a temperature axis".into()));
            }
            if self.mode == Mode::DeltaMixture && b.sigma_delta > 0.0 {
                return Err(CliError::Config("background sigma_delta conflicts with a sigma_delta axis".into()));
            }
        }
        if self.quadrature_order == Some(0) {
            return Err(CliError::Config("quadrature_order must be positive".into()));
        }
        if let Some(mc) = &self.mc_block {
            if mc.n_atoms == 0 || mc.n_shots == 0 || mc.n_periods == 0 || mc.points.is_empty() {
                return Err(CliError::Config("mc_block needs atoms, shots, periods and points".into()));
            }
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda_grid.values().expect("validated grid")
    }

    /// Noise values along the axis; `[0]` when there is none.
    pub fn noise_values(&self) -> Vec<f64> {
        match &self.noise_axis.grid {
            Some(g) => g.values().expect("validated grid"),
            None => vec![0.0],
        }
    }

    pub fn background(&self) -> Background {
        self.background.unwrap_or_default()
    }

    /// Whether two noise channels act together (an extension; each channel is otherwise treated alone).
    pub fn is_extension(&self) -> bool {
        let b = self.background();
        let thermal = self.mode == Mode::Thermal || b.temperature > 0.0;
        let delta = self.mode == Mode::DeltaMixture || b.sigma_delta > 0.0;
        thermal && delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"{
        "N": 100,
        "lambda_grid": {"start": -1.0, "stop": 0.0, "step": 0.25},
        "noise_axis": {"kind": "temperature", "grid": [0.0, 0.5]},
        "mode": "thermal",
        "seed": 7
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let spec = ScanSpec::from_json(SPEC).unwrap();
        assert_eq!(spec.lambdas(), vec![-1.0, -0.75, -0.5, -0.25, 0.0]);
        assert_eq!(spec.outputs, vec![OutputFormat::Csv, OutputFormat::Json]);
        let back = ScanSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(!spec.is_extension());
    }

    #[test]
    fn lower_case_n_is_accepted() {
        let spec = ScanSpec::from_json(r#"{"n": 10, "lambda_grid": [1.0], "mode": "ground_state"}"#).unwrap();
        assert_eq!(spec.n, 10);
        assert_eq!(spec.noise_values(), vec![0.0]);
    }

    #[test]
    fn rejects_inconsistent_specs() {
        for bad in [
            r#"{"N": 10, "lambda_grid": [1.0], "mode": "thermal"}"#,
            r#"{"N": 10, "lambda_grid": [1.0, 0.5, 2.0], "mode": "ground_state"}"#,
            r#"{"N": 10, "lambda_grid": [], "mode": "ground_state"}"#,
            r#"{"N": 0, "lambda_grid": [1.0], "mode": "ground_state"}"#,
            r#"{"N": 10, "lambda_grid": [1.0], "mode": "ground_state", "bogus": 1}"#,
            r#"{"N": 10, "lambda_grid": [1.0], "mode": "blurred", "noise_axis": {"kind": "sigma_detector", "grid": [-1.0]}}"#,
        ] {
            assert!(ScanSpec::from_json(bad).is_err(), "{bad}");
        }
    }
}
