//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dynamics::IntegratorConfig;
use crate::fisher::DEFAULT_RANK_TOL;
use crate::linalg::c;
use crate::scenarios::{ForcingKind, OscillatorSpec, StateSpec};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub outputs: Vec<OutputConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
}

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScenarioConfig {
    DephasingQubit(QubitConfig),
    Oscillator(OscillatorConfig),
    Random(RandomConfig),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub gamma_d: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ForcingName {
    #[default]
    Linear,
    Quadratic,
    TwoPhoton,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StateName {
    #[default]
    Ground,
    Coherent,
    Fock,
    SqueezedCoherent,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    #[serde(default)]
    pub kind: StateName,
    #[serde(default)]
    pub amplitude_re: f64,
    #[serde(default)]
    pub amplitude_im: f64,
    #[serde(default)]
    pub n: usize,
    #[serde(default = "one")]
    pub squeeze: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig { kind: StateName::Ground, amplitude_re: 0.0, amplitude_im: 0.0, n: 0, squeeze: 1.0 }
    }
}

impl StateConfig {
    pub fn to_spec(&self) -> StateSpec {
        let alpha = c(self.amplitude_re, self.amplitude_im);
        match self.kind {
            StateName::Ground => StateSpec::ground(),
            StateName::Coherent => StateSpec::coherent(alpha),
            StateName::Fock => StateSpec::fock(self.n),
            StateName::SqueezedCoherent => StateSpec::squeezed(alpha, self.squeeze),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub n_thermal: f64,
    #[serde(default = "one")]
    pub epsilon_re: f64,
    #[serde(default)]
    pub epsilon_im: f64,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub forcing: ForcingName,
    /// Quadratic forcing strength.
    #[serde(default)]
    pub omega_f: f64,
    /// Two-photon forcing amplitude.
    #[serde(default)]
    pub f_re: f64,
    #[serde(default)]
    pub f_im: f64,
    #[serde(default)]
    pub extra_damping: f64,
    #[serde(default)]
    pub extra_damping_from: f64,
    #[serde(default = "one")]
    pub source_squeeze: f64,
    #[serde(default)]
    pub source_phase: f64,
    #[serde(default)]
    pub state: StateConfig,
}

fn default_n_max() -> usize {
    40
}

impl OscillatorConfig {
    pub fn to_spec(&self) -> OscillatorSpec {
        let forcing = match self.forcing {
            ForcingName::Linear => ForcingKind::Linear,
            ForcingName::Quadratic => ForcingKind::Quadratic { omega_f: self.omega_f },
            ForcingName::TwoPhoton => ForcingKind::TwoPhoton { f: c(self.f_re, self.f_im) },
        };
        OscillatorSpec {
            n_max: self.n_max,
            gamma: self.gamma,
            n_thermal: self.n_thermal,
            epsilon: c(self.epsilon_re, self.epsilon_im),
            detuning: self.detuning,
            forcing,
            extra_damping: self.extra_damping,
            extra_damping_from: self.extra_damping_from,
            source_squeeze: self.source_squeeze,
            source_phase: self.source_phase,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default)]
    pub pure: bool,
}

fn default_dim() -> usize {
    3
}

fn default_channels() -> usize {
    2
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_end: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_refinement")]
    pub substep_refinement: usize,
    #[serde(default = "default_true")]
    pub hermitize_each_step: bool,
}

fn default_step() -> f64 {
    IntegratorConfig::default().step
}

fn default_refinement() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorSection { step: d.step, substep_refinement: d.substep_refinement, hermitize_each_step: d.hermitize_each_step }
    }
}

impl From<IntegratorSection> for IntegratorConfig {
    fn from(s: IntegratorSection) -> Self {
        IntegratorConfig { step: s.step, substep_refinement: s.substep_refinement, hermitize_each_step: s.hermitize_each_step }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    #[serde(default)]
    pub log_y: bool,
}

/// Configuration problems; all map to exit status 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Field { path: PathBuf, field: &'static str, message: String },
}

impl RunConfig {
    pub fn from_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: describe_toml_error(text, &e),
        })?;
        config.validate(path)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let mut config = Self::from_str(&text, path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for out in &mut config.outputs {
            out.csv = base.join(&out.csv);
            out.svg = out.svg.as_ref().map(|p| base.join(p));
        }
        Ok(config)
    }

    fn validate(&self, path: &Path) -> Result<(), ConfigError> {
        let field = |field, message: String| ConfigError::Field { path: path.to_path_buf(), field, message };
        if !(self.grid.t_end > 0.0) || !self.grid.t_end.is_finite() {
            return Err(field("grid.t_end", format!("must be positive, got {}", self.grid.t_end)));
        }
        if self.grid.points < 2 {
            return Err(field("grid.points", format!("need at least 2, got {}", self.grid.points)));
        }
        IntegratorConfig::from(self.integrator).validate().map_err(|e| field("integrator", e.to_string()))?;
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(field("rank_tol", format!("must lie in (0, 1), got {}", self.rank_tol)));
        }
        match &self.scenario {
            ScenarioConfig::DephasingQubit(q) => {
                if !(q.gamma_d >= 0.0) || !q.epsilon.is_finite() {
                    return Err(field("scenario", "need gamma_d >= 0 and finite epsilon".into()));
                }
            }
            ScenarioConfig::Oscillator(o) => o.to_spec().validate().map_err(|e| field("scenario", e.to_string()))?,
            ScenarioConfig::Random(r) => {
                if r.dim == 0 || r.dim > 8 {
                    return Err(field("scenario.dim", format!("must lie in 1..=8, got {}", r.dim)));
                }
            }
        }
        Ok(())
    }
}

/// `line L, column C: message`.
fn describe_toml_error(text: &str, e: &toml::de::Error) -> String {
    let message = e.message().to_string();
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            format!("line {line}, column {column}: {message}")
        }
        None => message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT: &str = r#"
seed = 3
[scenario]
name = "dephasing_qubit"
epsilon = 1.0
gamma_d = 0.5
[grid]
t_end = 3.0
points = 200
[[outputs]]
csv = "q.csv"
svg = "q.svg"
"#;

    #[test]
    fn parses_qubit() {
        let c = RunConfig::from_str(QUBIT, Path::new("q.toml")).unwrap();
        assert!(matches!(c.scenario, ScenarioConfig::DephasingQubit(QubitConfig { gamma_d, .. }) if gamma_d == 0.5));
        assert_eq!(c.grid.points, 200);
        assert_eq!(c.integrator.step, 0.01);
        assert_eq!(c.rank_tol, DEFAULT_RANK_TOL);
    }

    #[test]
    fn empty_name_is_rejected_with_line() {
        let text = QUBIT.replace("\"dephasing_qubit\"", "\"\"");
        let err = RunConfig::from_str(&text, Path::new("q.toml")).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = QUBIT.replace("gamma_d = 0.5", "gamma_d = 0.5\ngamma = 2.0");
        let err = RunConfig::from_str(&text, Path::new("q.toml")).unwrap_err().to_string();
        assert!(err.contains("gamma"), "{err}");
    }

    #[test]
    fn oscillator_defaults_and_validation() {
        let text = "[scenario]\nname = \"oscillator\"\nn_max = 12\n[scenario.state]\nkind = \"fock\"\nn = 2\n[grid]\nt_end = 1.0\npoints = 11\n";
        let c = RunConfig::from_str(text, Path::new("o.toml")).unwrap();
        match c.scenario {
            ScenarioConfig::Oscillator(o) => {
                assert_eq!(o.to_spec().n_max, 12);
                assert_eq!(o.state.to_spec(), StateSpec::fock(2));
            }
            _ => panic!(),
        }
        let bad = text.replace("n_max = 12", "n_max = 4");
        let err = RunConfig::from_str(&bad, Path::new("o.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::Field { field: "scenario", .. }), "{err}");
    }
}
