//! Run configuration. Every field name carries its unit as a suffix.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use spinqudit::dynamics::NoiseModel;
use spinqudit::hamiltonian::StaticParams;
use spinqudit::spincore::SpinQuantum;

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub spin: SpinConfig,
    #[serde(rename = "static")]
    pub static_params: StaticConfig,
    pub calibration: Calibration,
    pub noise: NoiseConfig,
    pub seed: u64,
    pub output_dir: String,
    pub rabi: RabiConfig,
    pub cat: CatConfig,
    pub tomography: TomographyConfig,
    pub wigner: WignerConfig,
    pub catcode: CatcodeConfig,
    pub floquet: FloquetConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spin: SpinConfig::default(),
            static_params: StaticConfig::default(),
            calibration: Calibration::default(),
            noise: NoiseConfig::Preset { name: "deviceA".into() },
            seed: 0,
            output_dir: "out".into(),
            rabi: RabiConfig::default(),
            cat: CatConfig::default(),
            tomography: TomographyConfig::default(),
            wigner: WignerConfig::default(),
            catcode: CatcodeConfig::default(),
            floquet: FloquetConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpinConfig {
    pub two_i: u32,
}

impl Default for SpinConfig {
    fn default() -> Self {
        Self { two_i: 7 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StaticConfig {
    pub b0_tesla: f64,
    pub gamma_hz_per_tesla: f64,
    pub f_q_hz: f64,
}

impl Default for StaticConfig {
    fn default() -> Self {
        Self { b0_tesla: 1.384, gamma_hz_per_tesla: 5.55e6, f_q_hz: 28e3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Calibration {
    /// Covariant Rabi frequency per unit drive amplitude.
    pub kappa_hz_per_mv: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self { kappa_hz_per_mv: 7.148 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    None,
    Uniform { t2_s: f64, alpha: f64 },
    Rates { zeeman_rate_per_s: f64, quadrupole_rate_per_s: f64, alpha: f64 },
    Preset { name: String },
}

pub const NOISE_PRESETS: &[&str] = &["deviceA"];

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RabiConfig {
    pub amplitude_mv: f64,
    /// `2I'` of the driven subspace; equal to `2I` for a covariant rotation.
    pub subspace_two_i: Option<u32>,
    pub periods: f64,
    pub samples: usize,
    pub sweep_mv: Vec<f64>,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self { amplitude_mv: 163.4 / 7.148, subspace_two_i: None, periods: 2.0, samples: 400, sweep_mv: vec![] }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CatMethod {
    Givens,
    Snap,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Z,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CatConfig {
    pub method: CatMethod,
    pub orientation: Axis,
    pub subspace_two_i: Option<u32>,
    pub amplitude_mv: f64,
    pub n_phi: usize,
    /// Free-evolution delays for the parity-contrast decay table.
    pub dephasing_taus_s: Vec<f64>,
}

impl Default for CatConfig {
    fn default() -> Self {
        Self {
            method: CatMethod::Snap,
            orientation: Axis::Z,
            subspace_two_i: None,
            amplitude_mv: 163.4 / 7.148,
            n_phi: 64,
            dephasing_taus_s: vec![],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Eigenstate { two_m: i32 },
    Scs { theta_rad: f64, phi_rad: f64 },
    Cat { axis: Axis, xi_rad: f64 },
    Mixed,
    File { path: String },
}

pub const STATE_PRESETS: &[&str] = &["eigenstate", "scs", "cat", "mixed", "file"];

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TomographyMode {
    Simulate,
    Reconstruct,
    Validate,
    Roundtrip,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub mode: TomographyMode,
    pub target: StateSpec,
    pub shots_per_axis: u64,
    pub record_file: Option<String>,
    pub roundtrip_seeds: usize,
    pub bootstrap_samples: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            mode: TomographyMode::Simulate,
            target: StateSpec::Cat { axis: Axis::Z, xi_rad: 0.0 },
            shots_per_axis: 15,
            record_file: None,
            roundtrip_seeds: 100,
            bootstrap_samples: 1000,
            tol: 1e-10,
            max_iter: 5000,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, JsonSchema, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionChoice {
    Hammer,
    Polar,
    Both,
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    pub state: StateSpec,
    pub n_theta: usize,
    pub n_phi: usize,
    pub projection: ProjectionChoice,
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self { state: StateSpec::Cat { axis: Axis::Z, xi_rad: std::f64::consts::PI }, n_theta: 181, n_phi: 361, projection: ProjectionChoice::Both }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CatcodeConfig {
    pub spins_two_i: Vec<u32>,
    pub max_iz_power: u32,
    pub tol: f64,
}

impl Default for CatcodeConfig {
    fn default() -> Self {
        Self { spins_two_i: vec![7], max_iz_power: 3, tol: 1e-10 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, JsonSchema, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FloquetConfig {
    /// `f_Rabi / f_q`; empty means 9 log-spaced values in [1e-3, 1e-1].
    pub ratios: Vec<f64>,
    pub magnus1: bool,
    pub operating_ratio: f64,
    pub fit_range: (f64, f64),
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self { ratios: vec![], magnus1: true, operating_ratio: 1e-2, fit_range: (1e-3, 1e-1) }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Sets `path` (dot separated) in `root` to `raw`, parsed as JSON when
/// possible and kept as a string otherwise.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<(), ConfigError> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError(format!("bad override path '{path}'")));
    }
    let mut node = root;
    for k in &keys[..keys.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| ConfigError(format!("{path}: '{k}' is not inside an object")))?;
        node = obj.entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node.as_object_mut().ok_or_else(|| ConfigError(format!("{path}: parent is not an object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Parses the document (or `{}`), applies `key=value` overrides and validates.
pub fn load(text: Option<&str>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut root: Value = match text {
        Some(t) => serde_json::from_str(t).map_err(|e| ConfigError(format!("config is not valid JSON: {e}")))?,
        None => Value::Object(Default::default()),
    };
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| ConfigError(format!("override '{o}' is not KEY=VALUE")))?;
        apply_override(&mut root, k.trim(), v.trim())?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(root).map_err(|e| {
        let path = e.path().to_string();
        ConfigError(format!("{path}: {}", e.inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError(format!("{path}: must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.quantum()?;
        positive("static.b0_tesla", self.static_params.b0_tesla)?;
        positive("static.gamma_hz_per_tesla", self.static_params.gamma_hz_per_tesla)?;
        positive("static.f_q_hz", self.static_params.f_q_hz)?;
        positive("calibration.kappa_hz_per_mv", self.calibration.kappa_hz_per_mv)?;
        positive("rabi.amplitude_mv", self.rabi.amplitude_mv)?;
        positive("rabi.periods", self.rabi.periods)?;
        for (i, a) in self.rabi.sweep_mv.iter().enumerate() {
            positive(&format!("rabi.sweep_mv[{i}]"), *a)?;
        }
        if self.rabi.samples < 2 {
            return Err(ConfigError("rabi.samples: need at least 2".into()));
        }
        positive("cat.amplitude_mv", self.cat.amplitude_mv)?;
        if self.cat.dephasing_taus_s.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(ConfigError("cat.dephasing_taus_s: delays must be non-negative".into()));
        }
        if self.tomography.shots_per_axis == 0 {
            return Err(ConfigError("tomography.shots_per_axis: must be positive".into()));
        }
        positive("tomography.tol", self.tomography.tol)?;
        if self.wigner.n_theta < 2 || self.wigner.n_phi < 2 {
            return Err(ConfigError("wigner.n_theta/n_phi: need at least 2 points".into()));
        }
        if self.catcode.spins_two_i.contains(&0) {
            return Err(ConfigError("catcode.spins_two_i: entries must be positive".into()));
        }
        for (i, r) in self.floquet.ratios.iter().enumerate() {
            positive(&format!("floquet.ratios[{i}]"), *r)?;
        }
        if let NoiseConfig::Preset { name } = &self.noise {
            if !NOISE_PRESETS.contains(&name.as_str()) {
                return Err(ConfigError(format!("noise.name: unknown preset '{name}', expected one of {NOISE_PRESETS:?}")));
            }
        }
        Ok(())
    }

    pub fn quantum(&self) -> Result<SpinQuantum, ConfigError> {
        SpinQuantum::new(self.spin.two_i).map_err(|e| ConfigError(format!("spin.two_i: {e}")))
    }

    pub fn static_params(&self) -> Result<StaticParams, ConfigError> {
        let s = &self.static_params;
        StaticParams::from_fq(s.b0_tesla, s.gamma_hz_per_tesla, s.f_q_hz).map_err(|e| ConfigError(format!("static: {e}")))
    }

    /// `None` for the noiseless model.
    pub fn noise_model(&self) -> Result<Option<NoiseModel>, ConfigError> {
        let q = self.quantum()?;
        let m = match &self.noise {
            NoiseConfig::None => return Ok(None),
            NoiseConfig::Uniform { t2_s, alpha } => NoiseModel::uniform(q, *t2_s, *alpha),
            NoiseConfig::Rates { zeeman_rate_per_s, quadrupole_rate_per_s, alpha } => {
                NoiseModel::from_rates(q, *zeeman_rate_per_s, *quadrupole_rate_per_s, *alpha)
            }
            // z-cat coherence time 15 ms, quadrupole-noise rate 2 / s
            NoiseConfig::Preset { .. } => NoiseModel::from_rates(q, 1.0 / (q.two_i() as f64 * 15e-3), 2.0, 1.0),
        };
        m.map(Some).map_err(|e| ConfigError(format!("noise: {e}")))
    }

    pub fn f_rabi(&self, amplitude_mv: f64) -> f64 {
        self.calibration.kappa_hz_per_mv * amplitude_mv
    }
}
