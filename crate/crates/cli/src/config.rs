//! Experiment configuration: JSON schema, validation, and builtin presets.

use serde::{Deserialize, Serialize};

use qfp_core::{Axis, BoundaryCondition, DriftDiffusionModel, Grid, ProbVector, Scheme};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelSpec,
    pub grid: Vec<AxisSpec>,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_boundary")]
    pub boundary: String,
    /// Flow rate into/out of the auxiliary site for sink/source boundaries.
    #[serde(default = "default_boundary_rate")]
    pub boundary_rate: f64,
    pub solver: SolverSpec,
    pub initial: InitialSpec,
    /// Output times for time-parameterized solvers (expm, schrod). Stepped
    /// solvers derive their stamps from `dt` and `n_steps`.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
}

fn default_scheme() -> String {
    String::from("rates")
}

fn default_boundary() -> String {
    String::from("reflecting")
}

fn default_boundary_rate() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    DoubleWell { kappa: f64, d: f64 },
    Spiral { gamma: f64, d: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverSpec {
    ClassicalExpm,
    ClassicalEuler { dt: f64, n_steps: usize },
    QBlock { dt: f64, n_steps: usize },
    QLcu { dt: f64, n_steps: usize },
    QSchrod { eta_max: f64, d_eta: f64 },
    SdeMc { dt: f64, n_steps: usize, n_samples: usize, seed: u64 },
}

impl SolverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::ClassicalExpm => "classical_expm",
            SolverSpec::ClassicalEuler { .. } => "classical_euler",
            SolverSpec::QBlock { .. } => "q_block",
            SolverSpec::QLcu { .. } => "q_lcu",
            SolverSpec::QSchrod { .. } => "q_schrod",
            SolverSpec::SdeMc { .. } => "sde_mc",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    /// Point mass at the grid point nearest `at`.
    Delta { at: Vec<f64> },
    /// Normalized Gaussian profile centred at `at`.
    Gaussian { at: Vec<f64>, width: f64 },
    /// Explicit vector loaded from a one-value-per-line file.
    File { path: String },
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.build_grid()?;
        self.build_model()?;
        self.parse_scheme()?;
        self.parse_boundary()?;
        match &self.solver {
            SolverSpec::ClassicalEuler { dt, n_steps }
            | SolverSpec::QBlock { dt, n_steps }
            | SolverSpec::QLcu { dt, n_steps } => {
                if !(*dt > 0.0) && *n_steps > 0 {
                    return Err(CliError::Validation(format!("solver.dt must be positive, got {dt}")));
                }
            }
            SolverSpec::QSchrod { eta_max, d_eta } => {
                if !(*eta_max > 0.0 && *d_eta > 0.0) {
                    return Err(CliError::Validation(format!(
                        "solver.eta_max and solver.d_eta must be positive, got {eta_max}, {d_eta}"
                    )));
                }
            }
            SolverSpec::SdeMc { dt, n_samples, .. } => {
                if !(*dt > 0.0) {
                    return Err(CliError::Validation(format!("solver.dt must be positive, got {dt}")));
                }
                if *n_samples == 0 {
                    return Err(CliError::Validation(String::from("solver.n_samples must be at least 1")));
                }
            }
            SolverSpec::ClassicalExpm => {}
        }
        if let Some(times) = &self.times {
            if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return Err(CliError::Validation(String::from("times must be finite and nonnegative")));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid, CliError> {
        let axes = self
            .grid
            .iter()
            .map(|a| Axis::new(&a.name, a.min, a.max, a.n_points))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Validation(format!("grid: {e}")))?;
        Grid::new(axes).map_err(|e| CliError::Validation(format!("grid: {e}")))
    }

    pub fn build_model(&self) -> Result<DriftDiffusionModel, CliError> {
        let model = match &self.model {
            ModelSpec::DoubleWell { kappa, d } => DriftDiffusionModel::double_well_1d(*kappa, *d),
            ModelSpec::Spiral { gamma, d } => DriftDiffusionModel::spiral_2d(*gamma, *d),
        };
        model.map_err(|e| CliError::Validation(format!("model: {e}")))
    }

    pub fn parse_scheme(&self) -> Result<Scheme, CliError> {
        match self.scheme.as_str() {
            "rates" => Ok(Scheme::Rates),
            "finite_difference" => Ok(Scheme::FiniteDifference),
            other => Err(CliError::Validation(format!(
                "scheme must be \"rates\" or \"finite_difference\", got \"{other}\""
            ))),
        }
    }

    pub fn parse_boundary(&self) -> Result<BoundaryCondition, CliError> {
        match self.boundary.as_str() {
            "reflecting" => Ok(BoundaryCondition::Reflecting),
            "periodic" => Ok(BoundaryCondition::Periodic),
            "sink" => Ok(BoundaryCondition::AbsorbingSink { rate: self.boundary_rate }),
            "source" => Ok(BoundaryCondition::Source { rate: self.boundary_rate }),
            other => Err(CliError::Validation(format!(
                "boundary must be one of reflecting/periodic/sink/source, got \"{other}\""
            ))),
        }
    }

    pub fn build_initial(&self, grid: &Grid) -> Result<ProbVector, CliError> {
        match &self.initial {
            InitialSpec::Delta { at } => ProbVector::delta(grid, at)
                .map_err(|e| CliError::Validation(format!("initial: {e}"))),
            InitialSpec::Gaussian { at, width } => ProbVector::gaussian(grid, at, *width)
                .map_err(|e| CliError::Validation(format!("initial: {e}"))),
            InitialSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("initial file {path}: {e}")))?;
                let values = text
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| l.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Validation(format!("initial file {path}: {e}")))?;
                if values.len() != grid.total_points() {
                    return Err(CliError::Validation(format!(
                        "initial file {path}: {} values for a {}-point grid",
                        values.len(),
                        grid.total_points()
                    )));
                }
                ProbVector::normalized(values)
                    .map_err(|e| CliError::Validation(format!("initial: {e}")))
            }
        }
    }
}

/// Builtin presets mirroring the experiments in the source material.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let axis_1d = || vec![AxisSpec { name: String::from("x"), min: -2.0, max: 2.0, n_points: 21 }];
    let axis_2d = || {
        vec![
            AxisSpec { name: String::from("x"), min: -2.0, max: 2.0, n_points: 21 },
            AxisSpec { name: String::from("y"), min: -2.0, max: 2.0, n_points: 21 },
        ]
    };
    match name {
        // 1D double well under the block-encoded Euler solver.
        "exp1" => Some(ExperimentConfig {
            name: String::from("exp1"),
            model: ModelSpec::DoubleWell { kappa: 0.5, d: 0.15 },
            grid: axis_1d(),
            scheme: default_scheme(),
            boundary: default_boundary(),
            boundary_rate: default_boundary_rate(),
            solver: SolverSpec::QBlock { dt: 0.1, n_steps: 40 },
            initial: InitialSpec::Delta { at: vec![0.0] },
            times: None,
        }),
        // 2D inward spiral under the Fourier-register solver.
        "exp2" => Some(ExperimentConfig {
            name: String::from("exp2"),
            model: ModelSpec::Spiral { gamma: 0.1, d: 0.15 },
            grid: axis_2d(),
            scheme: default_scheme(),
            boundary: default_boundary(),
            boundary_rate: default_boundary_rate(),
            solver: SolverSpec::QSchrod { eta_max: 10.0, d_eta: 0.01 },
            initial: InitialSpec::Delta { at: vec![1.0, 1.0] },
            times: Some((0..=16).map(|k| k as f64 * 0.25).collect()),
        }),
        // 1D double well under the LCU Euler solver.
        "exp3" => Some(ExperimentConfig {
            name: String::from("exp3"),
            model: ModelSpec::DoubleWell { kappa: 0.5, d: 0.15 },
            grid: axis_1d(),
            scheme: default_scheme(),
            boundary: default_boundary(),
            boundary_rate: default_boundary_rate(),
            solver: SolverSpec::QLcu { dt: 0.01, n_steps: 100 },
            initial: InitialSpec::Delta { at: vec![0.0] },
            times: None,
        }),
        // 1D double well sampled from the underlying SDE.
        "exp4" => Some(ExperimentConfig {
            name: String::from("exp4"),
            model: ModelSpec::DoubleWell { kappa: 0.5, d: 0.15 },
            grid: axis_1d(),
            scheme: default_scheme(),
            boundary: default_boundary(),
            boundary_rate: default_boundary_rate(),
            solver: SolverSpec::SdeMc { dt: 1e-3, n_steps: 4000, n_samples: 100_000, seed: 42 },
            initial: InitialSpec::Delta { at: vec![0.0] },
            times: None,
        }),
        _ => None,
    }
}

/// Resolves a `--config` value: a builtin preset name or a JSON file path.
pub fn resolve(value: &str) -> Result<ExperimentConfig, CliError> {
    if let Some(p) = preset(value) {
        p.validate()?;
        return Ok(p);
    }
    let text = std::fs::read_to_string(value)
        .map_err(|e| CliError::Validation(format!("cannot read config \"{value}\": {e}")))?;
    ExperimentConfig::from_json(&text)
}
