//! Versioned TOML run configuration.
//!
//! ```toml
//! schema = 1
//! mode = "sweep"            # sweep | pe-session | bounds-audit
//! seed = 7
//! output = "out/sweep"      # directory, relative to this file
//!
//! [sweep]
//! hamiltonian = "../instances/tfim6.txt"
//! surrogate = "exact-ground-state"   # or a surrogate file path
//! rho_values = [0.001, 1.0]
//! sample_counts = [8, 32, 128]
//! ensemble_size = 100
//! floor_fraction = 1e-9     # 0 disables the floor
//! ```
//!
//! Unknown keys are errors. Paths resolve against the config file's
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const EXACT_GROUND_STATE: &str = "exact-ground-state";

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sweep,
    PeSession,
    BoundsAudit,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sweep => "sweep",
            Mode::PeSession => "pe-session",
            Mode::BoundsAudit => "bounds-audit",
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: u32,
    pub mode: Mode,
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub sweep: Option<SweepSection>,
    pub pe: Option<PeSection>,
    pub audit: Option<AuditSection>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_ensemble() -> usize {
    100
}

fn default_floor() -> f64 {
    rhpe_core::sampler::DEFAULT_FLOOR_FRACTION
}

fn default_surrogate() -> String {
    EXACT_GROUND_STATE.to_string()
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub hamiltonian: PathBuf,
    #[serde(default = "default_surrogate")]
    pub surrogate: String,
    pub rho_values: Vec<f64>,
    pub sample_counts: Vec<u64>,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_floor")]
    pub floor_fraction: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    #[default]
    PosteriorMean,
    CircularMean,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PeSection {
    pub hamiltonian: PathBuf,
    pub sessions: usize,
    pub experiments: usize,
    pub grid_points: Option<usize>,
    pub max_reps: Option<f64>,
    pub time_per_rep: Option<f64>,
    #[serde(default)]
    pub estimator: EstimatorName,
    #[serde(default)]
    pub carry_state: bool,
    #[serde(default = "default_true")]
    pub write_traces: bool,
    /// Failure probability used when reporting the failure condition.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Phase-error threshold (radians) for the success fraction.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub sampler: Option<PeSampler>,
}

fn default_true() -> bool {
    true
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_tolerance() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PeSampler {
    pub rho: f64,
    pub draws: u64,
    #[serde(default = "default_surrogate")]
    pub surrogate: String,
    #[serde(default = "default_floor")]
    pub floor_fraction: f64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default)]
    pub strict_instances: usize,
    pub strict_grid_points: Option<usize>,
    #[serde(default)]
    pub perturbative_instances: usize,
    pub max_ratio: Option<f64>,
    #[serde(default = "default_bins")]
    pub ratio_bins: usize,
    pub subsample: Option<SubsampleSection>,
}

fn default_bins() -> usize {
    5
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SubsampleSection {
    pub hamiltonian: PathBuf,
    pub m_values: Vec<u64>,
    pub trials: usize,
    #[serde(default = "default_probe_reps")]
    pub probe_reps: f64,
    pub probe_time: f64,
}

fn default_probe_reps() -> f64 {
    1.0
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, validates and resolves relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Config::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        if let Some(s) = &mut self.sweep {
            fix(&mut s.hamiltonian);
            if s.surrogate != EXACT_GROUND_STATE {
                s.surrogate = base.join(&s.surrogate).to_string_lossy().into_owned();
            }
        }
        if let Some(p) = &mut self.pe {
            fix(&mut p.hamiltonian);
            if let Some(s) = &mut p.sampler {
                if s.surrogate != EXACT_GROUND_STATE {
                    s.surrogate = base.join(&s.surrogate).to_string_lossy().into_owned();
                }
            }
        }
        if let Some(sub) = self.audit.as_mut().and_then(|a| a.subsample.as_mut()) {
            fix(&mut sub.hamiltonian);
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema: unsupported version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let sections = [
            (Mode::Sweep, self.sweep.is_some(), "sweep"),
            (Mode::PeSession, self.pe.is_some(), "pe"),
            (Mode::BoundsAudit, self.audit.is_some(), "audit"),
        ];
        for (mode, present, table) in sections {
            if mode == self.mode && !present {
                return Err(config_err(format!("mode {}: missing [{table}] table", mode.name())));
            }
        }
        for (mode, present, table) in sections {
            if mode != self.mode && present {
                return Err(config_err(format!(
                    "[{table}] table is not used by mode {}",
                    self.mode.name()
                )));
            }
        }
        if let Some(s) = &self.sweep {
            validate_rho_list(&s.rho_values)?;
            if s.sample_counts.is_empty() {
                return Err(config_err("sweep.sample_counts: must not be empty"));
            }
            if let Some(i) = s.sample_counts.iter().position(|&n| n == 0) {
                return Err(config_err(format!("sweep.sample_counts[{i}]: must be at least 1")));
            }
            if s.ensemble_size == 0 {
                return Err(config_err("sweep.ensemble_size: must be at least 1"));
            }
            validate_floor("sweep.floor_fraction", s.floor_fraction)?;
        }
        if let Some(p) = &self.pe {
            if p.grid_points == Some(0) {
                return Err(config_err("pe.grid_points: must be at least 1"));
            }
            if let Some(m) = p.max_reps {
                if !(m > 0.0 && m.is_finite()) {
                    return Err(config_err(format!("pe.max_reps: must be positive, got {m}")));
                }
            }
            if let Some(t) = p.time_per_rep {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(config_err(format!("pe.time_per_rep: must be positive, got {t}")));
                }
            }
            if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
                return Err(config_err(format!("pe.epsilon: must lie in (0, 1), got {}", p.epsilon)));
            }
            if !(p.tolerance > 0.0) {
                return Err(config_err(format!("pe.tolerance: must be positive, got {}", p.tolerance)));
            }
            if let Some(s) = &p.sampler {
                if !(0.0..=1.0).contains(&s.rho) {
                    return Err(config_err(format!("pe.sampler.rho: {} is outside [0, 1]", s.rho)));
                }
                if s.draws == 0 {
                    return Err(config_err("pe.sampler.draws: must be at least 1"));
                }
                validate_floor("pe.sampler.floor_fraction", s.floor_fraction)?;
            }
        }
        if let Some(a) = &self.audit {
            if a.ratio_bins == 0 {
                return Err(config_err("audit.ratio_bins: must be at least 1"));
            }
            if a.strict_grid_points == Some(0) {
                return Err(config_err("audit.strict_grid_points: must be at least 1"));
            }
            if let Some(r) = a.max_ratio {
                if !(r > 0.0 && r < 0.5) {
                    return Err(config_err(format!("audit.max_ratio: must lie in (0, 0.5), got {r}")));
                }
            }
            if let Some(s) = &a.subsample {
                if s.trials == 0 {
                    return Err(config_err("audit.subsample.trials: must be at least 1"));
                }
                if let Some(i) = s.m_values.iter().position(|&m| m == 0) {
                    return Err(config_err(format!("audit.subsample.m_values[{i}]: must be at least 1")));
                }
                if !(s.probe_time > 0.0 && s.probe_reps > 0.0) {
                    return Err(config_err("audit.subsample: probe_time and probe_reps must be positive"));
                }
            }
        }
        Ok(())
    }
}

fn validate_rho_list(values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(config_err("sweep.rho_values: must not be empty"));
    }
    for (i, r) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(r) {
            return Err(config_err(format!("sweep.rho_values[{i}]: {r} is outside [0, 1]")));
        }
    }
    Ok(())
}

fn validate_floor(field: &str, f: f64) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&f) {
        return Err(config_err(format!("{field}: {f} is outside [0, 1)")));
    }
    Ok(())
}
