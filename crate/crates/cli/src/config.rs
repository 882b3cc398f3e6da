//! On-disk job description. Everything is validated before any computation.

use std::path::{Path, PathBuf};

use iac_core::diagnostics::Tolerances;
use iac_core::presets::Preset;
use iac_core::steppers::SolverConfig;
use iac_core::{Field, Grid, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub dim: usize,
    pub endpoints: Vec<[f64; 2]>,
    pub n_interior: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    /// Overrides `solver.snapshot_stride`.
    #[serde(default)]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Monotone,
    EnergyDecrease,
    EtaMonotone,
    Range,
    Dissipation,
    Smoothing,
    Equilibrium,
    Ei5,
    Ei6,
    DecayRate,
    ExponentialConvergence,
}

impl CheckName {
    pub const DEFAULT_SUITE: [CheckName; 7] = [
        CheckName::Monotone,
        CheckName::EnergyDecrease,
        CheckName::EtaMonotone,
        CheckName::Range,
        CheckName::Dissipation,
        CheckName::Smoothing,
        CheckName::Equilibrium,
    ];
}

fn default_decay_start() -> f64 {
    0.5
}
fn default_decay_ratio() -> f64 {
    0.85
}
fn default_exp_slack() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    /// Empty means the default suite.
    #[serde(default)]
    pub names: Vec<CheckName>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Verify an existing run instead of computing a fresh one.
    #[serde(default)]
    pub trajectory_dir: Option<PathBuf>,
    /// Constraint level for the smoothing check; defaults to `dr_value(u₀)`.
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default = "default_decay_start")]
    pub decay_t_start: f64,
    #[serde(default = "default_decay_ratio")]
    pub decay_min_ratio: f64,
    #[serde(default = "default_exp_slack")]
    pub exponential_slack: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            names: Vec::new(),
            tolerances: Tolerances::default(),
            trajectory_dir: None,
            r: None,
            decay_t_start: default_decay_start(),
            decay_min_ratio: default_decay_ratio(),
            exponential_slack: default_exp_slack(),
        }
    }
}

impl Checks {
    pub fn selected(&self) -> Vec<CheckName> {
        if self.names.is_empty() {
            CheckName::DEFAULT_SUITE.to_vec()
        } else {
            self.names.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Zero {},
    Constant { value: f64 },
    /// `V = 3u₀²` from the configured initial data; also reports `σ = λ − κ`.
    ThreeU0Squared {},
    Csv { path: PathBuf },
}

fn default_eigen_tol() -> f64 {
    1e-10
}
fn default_eigen_iter() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSection {
    pub potential: Potential,
    #[serde(default = "default_eigen_tol")]
    pub tol: f64,
    #[serde(default = "default_eigen_iter")]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    /// Final state of a run with the `solver` section.
    #[default]
    FinalState,
    Initial,
}

fn default_eq_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumSection {
    #[serde(default = "default_eq_tol")]
    pub tol: f64,
    #[serde(default)]
    pub warm_start: WarmStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSection {
    /// Yosida runs for each `λ` against an implicit reference.
    Yosida { lambdas: Vec<f64> },
    /// The initial data and a copy raised by `shift`.
    Comparison { shift: f64 },
    /// One run per preset, then the absorbing-set check on a calibrated box.
    Absorbing { presets: Vec<Preset> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Domain,
    pub model: ModelParams,
    #[serde(default = "zero_preset")]
    pub initial: Preset,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub eigen: Option<EigenSection>,
    #[serde(default)]
    pub equilibrium: Option<EquilibriumSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

fn zero_preset() -> Preset {
    Preset::Zero {}
}

/// A parsed and validated job.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: RunConfig,
    /// The configuration as written, with relative paths resolved.
    pub echo: serde_json::Value,
    pub grid: Grid,
    pub params: ModelParams,
    pub u0: Field,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_preset(base: &Path, preset: &mut Preset) {
    if let Preset::Custom { path } = preset {
        resolve(base, path);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| invalid(format!("malformed configuration: {e}")))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let d = &self.domain;
        if d.endpoints.len() != d.dim || d.n_interior.len() != d.dim {
            return Err(invalid(format!(
                "domain.dim = {} but {} endpoint pairs and {} node counts were given",
                d.dim,
                d.endpoints.len(),
                d.n_interior.len()
            )));
        }
        let ends: Vec<(f64, f64)> = d.endpoints.iter().map(|e| (e[0], e[1])).collect();
        Grid::new(d.dim, &ends, &d.n_interior).map_err(|e| invalid(e.to_string()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve_preset(base, &mut self.initial);
        if let Some(d) = &mut self.outputs.directory {
            resolve(base, d);
        }
        if let Some(d) = &mut self.checks.trajectory_dir {
            resolve(base, d);
        }
        if let Some(EigenSection { potential: Potential::Csv { path }, .. }) = &mut self.eigen {
            resolve(base, path);
        }
        if let Some(SweepSection::Absorbing { presets }) = &mut self.sweep {
            presets.iter_mut().for_each(|p| resolve_preset(base, p));
        }
    }

    /// Solver section with the output stride applied; required by `run`, `verify` and `sweep`.
    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let mut s = self.solver.clone().ok_or_else(|| invalid("this command needs a `solver` section"))?;
        if let Some(stride) = self.outputs.stride {
            s.snapshot_stride = stride;
        }
        Ok(s)
    }
}

impl Job {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, &base)
    }

    pub fn from_str(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut config = RunConfig::parse(text)?;
        config.resolve_paths(base);
        let grid = config.grid()?;
        let params = ModelParams::new(config.model.kappa).map_err(|e| invalid(e.to_string()))?;
        let u0 = config.initial.build(&grid, &params).map_err(|e| invalid(e.to_string()))?;
        if let Some(s) = &config.solver {
            let mut s = s.clone();
            if let Some(stride) = config.outputs.stride {
                s.snapshot_stride = stride;
            }
            s.validate(&grid, &params).map_err(|e| invalid(e.to_string()))?;
        }
        if let Some(SweepSection::Absorbing { presets }) = &config.sweep {
            if presets.is_empty() {
                return Err(invalid("absorbing sweep needs at least one preset"));
            }
            for p in presets {
                p.build(&grid, &params).map_err(|e| invalid(e.to_string()))?;
            }
        }
        if let Some(e) = &config.eigen {
            if !(e.tol > 0.0) || e.max_iter == 0 {
                return Err(invalid("eigen.tol must be positive and eigen.max_iter at least 1"));
            }
        }
        if let Some(e) = &config.equilibrium {
            if !(e.tol > 0.0) {
                return Err(invalid("equilibrium.tol must be positive"));
            }
        }
        let echo = serde_json::to_value(&config).map_err(|e| invalid(e.to_string()))?;
        Ok(Self { config, echo, grid, params, u0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "domain": {"dim": 1, "endpoints": [[-1, 1]], "n_interior": [31]},
        "model": {"kappa": 1},
        "initial": {"preset": "abs_edge"},
        "solver": {"scheme": "implicit_obstacle", "dt": 0.01, "t_end": 0.1}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let job = Job::from_str(BASE, Path::new(".")).unwrap();
        assert_eq!(job.grid.len(), 31);
        assert_eq!(job.u0.min(), -1.0);
        assert_eq!(job.config.checks.selected().len(), 7);
    }

    #[test]
    fn rejects_unknown_keys_everywhere() {
        for bad in [
            BASE.replace("\"model\"", "\"extra\": 1, \"model\""),
            BASE.replace("{\"kappa\": 1}", "{\"kappa\": 1, \"mu\": 2}"),
            BASE.replace("\"abs_edge\"}", "\"abs_edge\", \"a\": 2}"),
            BASE.replace("\"t_end\": 0.1", "\"t_end\": 0.1, \"theta\": 0.5"),
        ] {
            assert!(matches!(Job::from_str(&bad, Path::new(".")), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn rejects_invalid_values() {
        for bad in [
            BASE.replace("\"kappa\": 1", "\"kappa\": -1"),
            BASE.replace("[31]", "[0]"),
            BASE.replace("\"dim\": 1", "\"dim\": 2"),
            BASE.replace("[[-1, 1]]", "[[0, 1]]"),
            BASE.replace("\"implicit_obstacle\", \"dt\": 0.01", "\"explicit\", \"dt\": 0.01"),
            "{ not json".to_string(),
        ] {
            assert!(matches!(Job::from_str(&bad, Path::new(".")), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let text = BASE.replace(
            "{\"preset\": \"abs_edge\"}",
            "{\"preset\": \"custom\", \"path\": \"u0.csv\"}",
        );
        let mut cfg = RunConfig::parse(&text).unwrap();
        cfg.resolve_paths(Path::new("/data/jobs"));
        assert_eq!(cfg.initial, Preset::Custom { path: "/data/jobs/u0.csv".into() });
    }

    #[test]
    fn stride_override() {
        let text = BASE.replace("\"solver\"", "\"outputs\": {\"stride\": 7}, \"solver\"");
        let job = Job::from_str(&text, Path::new(".")).unwrap();
        assert_eq!(job.config.solver().unwrap().snapshot_stride, 7);
    }
}
