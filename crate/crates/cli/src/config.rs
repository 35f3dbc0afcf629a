//! Run configuration, parsed from TOML. Unknown keys are rejected so typos
//! fail loudly instead of silently falling back to defaults.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sselab_core::laws::NoiseClass;
use sselab_core::noise::{InitialData, NoiseKind, NoiseModel};
use sselab_core::qstate::{build_operator, commutator, ComplexMatrix, OperatorSpec, PauliAxis, PureState};
use sselab_core::sde::{Scheme, SimConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unknown preset or missing file: {0}")]
    NotFound(String),
    #[error("scenario {scenario}: {message}")]
    Invalid { scenario: String, message: String },
}

fn invalid(scenario: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        scenario: scenario.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Pauli,
    Projection,
    Twoqubit,
    Noncommuting,
    ApproxOrder,
    Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub noise: NoiseSection,
    pub system: SystemSection,
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub check: CheckSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: NoiseKind,
    pub gamma: f64,
    #[serde(default)]
    pub k: f64,
    #[serde(default = "default_init")]
    pub init: InitialData,
}

fn default_init() -> InitialData {
    InitialData::Calibrated
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Operator string, e.g. `"X"`, `"P"`, `"Z"`. For two-qubit scenarios
    /// this is the single-qubit `Q` in `S = Q⊗I + I⊗Q`.
    pub noise_operator: String,
    /// Hamiltonian string; absent means `H = 0`. For the non-commuting case
    /// a single Pauli letter, scaled by `alpha`.
    #[serde(default)]
    pub hamiltonian: Option<String>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// One character per qubit from `0 1 + - r l`, `ghz`, or `theta:<rad>`.
    pub initial_state: String,
    #[serde(default)]
    pub noise_class: Option<NoiseClass>,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "yes")]
    pub renormalize: bool,
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Times at which fidelity distributions are written.
    #[serde(default)]
    pub distribution_times: Vec<f64>,
    #[serde(default = "default_samples")]
    pub distribution_samples: usize,
    /// Number of single-path trajectory files to write.
    #[serde(default)]
    pub trajectories: usize,
    /// RK4 horizon for the closure curves of `approx-order`.
    #[serde(default)]
    pub approx_horizon: Option<f64>,
}

fn default_samples() -> usize {
    2000
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            distribution_times: Vec::new(),
            distribution_samples: default_samples(),
            trajectories: 0,
            approx_horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    /// Times at which the Monte-Carlo mean is compared with the analytic
    /// mean; empty means the final time.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_z")]
    pub max_z: f64,
    #[serde(default = "default_ks")]
    pub max_ks: f64,
    /// Absolute tolerance for approximate means (non-commuting case).
    #[serde(default = "default_abs")]
    pub max_abs: f64,
}

fn default_z() -> f64 {
    3.0
}

fn default_ks() -> f64 {
    0.05
}

fn default_abs() -> f64 {
    0.02
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            max_z: default_z(),
            max_ks: default_ks(),
            max_abs: default_abs(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenarios.is_empty() {
            return Err(invalid(&self.name, "no scenarios"));
        }
        let mut names: Vec<&str> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(&self.name, "scenario names must be unique"));
        }
        for s in &self.scenarios {
            s.resolve()?;
        }
        Ok(())
    }
}

/// A scenario with operators, state and model built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: NoiseModel,
    pub h: ComplexMatrix,
    pub s: ComplexMatrix,
    /// Single-qubit `Q` for two-qubit scenarios.
    pub q: Option<ComplexMatrix>,
    pub phi0: PureState,
    pub class: NoiseClass,
    pub sim: SimConfig,
    pub h_axis: Option<PauliAxis>,
    pub s_axis: Option<PauliAxis>,
}

fn single_axis(text: &str) -> Option<PauliAxis> {
    match OperatorSpec::parse(text).ok()? {
        OperatorSpec::Pauli(a) => Some(a),
        _ => None,
    }
}

/// Parses an initial-state string.
pub fn parse_state(text: &str) -> Option<PureState> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("theta:") {
        return rest.trim().parse::<f64>().ok().map(PureState::real_rotation);
    }
    if let Some(rest) = t.strip_prefix("ghz") {
        let n = if rest.is_empty() { 2 } else { rest.parse().ok()? };
        return (n >= 1).then(|| PureState::ghz(n));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut acc: Option<PureState> = None;
    for ch in t.chars() {
        let amps = match ch {
            '0' => vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            '1' => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            '+' => vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            '-' => vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            'r' => vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)],
            'l' => vec![Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            _ => return None,
        };
        let q = PureState::new(amps).ok()?;
        acc = Some(match acc {
            None => q,
            Some(a) => a.tensor(&q),
        });
    }
    acc
}

impl Scenario {
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let err = |m: String| invalid(&self.name, m);
        let n = &self.noise;
        let model = NoiseModel::new(n.kind, n.gamma, n.k, n.init).map_err(|e| err(e.to_string()))?;
        let phi0 = parse_state(&self.system.initial_state)
            .ok_or_else(|| err(format!("bad initial_state {:?}", self.system.initial_state)))?;
        let op = |text: &str| -> Result<ComplexMatrix, ConfigError> {
            let spec = OperatorSpec::parse(text).map_err(|e| err(e.to_string()))?;
            build_operator(&spec).map_err(|e| err(e.to_string()))
        };
        let sys = &self.system;
        let base = op(&sys.noise_operator)?;
        let class = sys.noise_class.unwrap_or(match self.kind {
            ScenarioKind::Projection => NoiseClass::Projection,
            _ => NoiseClass::Pauli,
        });
        let (s, q) = if self.kind == ScenarioKind::Twoqubit {
            let id = ComplexMatrix::identity(2);
            (&base.kron(&id) + &id.kron(&base), Some(base))
        } else {
            (base, None)
        };
        let dim = s.dim();
        let (h, h_axis, s_axis) = match self.kind {
            ScenarioKind::Noncommuting => {
                let ha = sys
                    .hamiltonian
                    .as_deref()
                    .and_then(single_axis)
                    .ok_or_else(|| err("non-commuting case needs a single Pauli Hamiltonian".into()))?;
                let sa = single_axis(&sys.noise_operator)
                    .ok_or_else(|| err("non-commuting case needs a single Pauli noise operator".into()))?;
                if ha == sa {
                    return Err(err("H and S must differ".into()));
                }
                if !(sys.alpha > 0.0 && sys.alpha.is_finite()) {
                    return Err(err(format!("alpha must be positive, got {}", sys.alpha)));
                }
                (ha.matrix().scale_real(sys.alpha), Some(ha), Some(sa))
            }
            _ => {
                let h = match sys.hamiltonian.as_deref() {
                    None => ComplexMatrix::zeros(dim),
                    Some(t) => op(t)?,
                };
                (h, None, None)
            }
        };
        if h.dim() != dim || phi0.dim() != dim {
            return Err(err(format!(
                "dimension mismatch: H {}, S {}, state {}",
                h.dim(),
                dim,
                phi0.dim()
            )));
        }
        if self.kind != ScenarioKind::Noncommuting
            && commutator(&h, &s, false).map_err(|e| err(e.to_string()))?.norm_one() > 1e-12
        {
            return Err(err("closed-form scenarios need [H, S] = 0".into()));
        }
        match self.kind {
            ScenarioKind::Pauli | ScenarioKind::ApproxOrder | ScenarioKind::Distribution | ScenarioKind::Projection
                if dim != 2 =>
            {
                return Err(err("single-qubit scenario needs a 2×2 noise operator".into()))
            }
            ScenarioKind::Twoqubit if dim != 4 => return Err(err("two-qubit scenario needs a single-qubit Q".into())),
            ScenarioKind::ApproxOrder
                if n.kind != NoiseKind::OrnsteinUhlenbeck || n.init != InitialData::Calibrated =>
            {
                return Err(err("closure curves need calibrated Ornstein-Uhlenbeck noise".into()))
            }
            _ => {}
        }
        let sim = SimConfig {
            dt: self.sim.dt,
            horizon: self.sim.horizon,
            scheme: self.sim.scheme,
            renormalize: self.sim.renormalize,
            n_paths: self.sim.paths,
            master_seed: self.sim.seed,
            record_every: self.sim.record_every,
            keep_states: self.output.trajectories > 0,
        };
        sim.validate().map_err(|e| err(e.to_string()))?;
        for &t in self.output.distribution_times.iter().chain(&self.check.times) {
            if !(0.0..=self.sim.horizon).contains(&t) {
                return Err(err(format!("time {t} outside [0, {}]", self.sim.horizon)));
            }
        }
        if self.output.trajectories > self.sim.paths {
            return Err(err("more trajectory files than paths".into()));
        }
        if !self.output.distribution_times.is_empty() && self.output.distribution_samples < 10 {
            return Err(err("distribution_samples must be at least 10".into()));
        }
        Ok(Resolved {
            model,
            h,
            s,
            q,
            phi0,
            class,
            sim,
            h_axis,
            s_axis,
        })
    }
}
