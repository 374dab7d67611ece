//! TOML run configuration shared by the CLI subcommands.
//!
//! Every section is optional and falls back to the default heavy top or
//! sine-Euler setup. See `docs/config.md` for the schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{Method, StepperConfig};
use crate::models::{
    build_heavy_top, build_sine_euler, HeavyTopParams, Model, ModeValue, NoiseMode, SineEulerParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    HeavyTop,
    SineEuler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: ModelKind::HeavyTop }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeavyTopSection {
    pub inertia: [f64; 3],
    pub chi: [f64; 3],
    pub alpha: [f64; 3],
    pub pi0: [f64; 3],
    pub gamma0: [f64; 3],
}

impl Default for HeavyTopSection {
    fn default() -> Self {
        let p = HeavyTopParams::default();
        Self {
            inertia: p.inertia,
            chi: p.chi,
            alpha: p.alpha,
            pi0: p.pi0,
            gamma0: p.gamma0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModeEntry {
    pub mode: [i64; 2],
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitEntry {
    pub mode: [i64; 2],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SineEulerSection {
    pub n: usize,
    pub noise_modes: Vec<NoiseModeEntry>,
    pub init: Vec<InitEntry>,
    pub init_seed: u64,
}

impl Default for SineEulerSection {
    fn default() -> Self {
        let p = SineEulerParams::default();
        Self {
            n: p.n,
            noise_modes: p
                .noise_modes
                .iter()
                .map(|m| NoiseModeEntry { mode: m.mode, amplitude: m.amplitude })
                .collect(),
            init: Vec::new(),
            init_seed: p.init_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub method: String,
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub record_every: usize,
    pub replay_path: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            method: "tmk".into(),
            dt: 0.01,
            t_final: 100.0,
            seed: 0,
            output_dir: PathBuf::from("out"),
            record_every: 1,
            replay_path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub chord_tol: f64,
    pub chord_max_iter: usize,
    pub dexpinv_order: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = StepperConfig::default();
        Self {
            chord_tol: d.chord_tol,
            chord_max_iter: d.chord_max_iter,
            dexpinv_order: d.dexpinv_order,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeSection {
    pub base_dt: f64,
    pub t_final: f64,
    pub levels: Vec<u32>,
    pub reference_level: u32,
    pub n_seeds: usize,
    /// Drop the diffusions and measure the deterministic order.
    pub deterministic: bool,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            base_dt: 0.1,
            t_final: 1.0,
            levels: vec![2, 3, 4, 5, 6],
            reference_level: 8,
            n_seeds: 64,
            deterministic: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub dts: Vec<f64>,
    pub horizon: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            dts: vec![0.01, 0.1, 0.4, 0.8, 1.6],
            horizon: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub methods: Vec<String>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            methods: vec!["tmk".into(), "direct-im".into()],
        }
    }
}

/// The full resolved configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub heavy_top: HeavyTopSection,
    pub sine_euler: SineEulerSection,
    pub run: RunSection,
    pub solver: SolverSection,
    pub converge: ConvergeSection,
    pub probe: ProbeSection,
    pub compare: CompareSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if !(r.dt > 0.0 && r.dt.is_finite()) {
            return Err(Error::Config(format!("run.dt must be positive, got {}", r.dt)));
        }
        if !(r.t_final > 0.0 && r.t_final.is_finite()) {
            return Err(Error::Config(format!("run.t_final must be positive, got {}", r.t_final)));
        }
        if r.record_every == 0 {
            return Err(Error::Config("run.record_every must be at least 1".into()));
        }
        self.method()?;
        self.compare_methods()?;
        self.stepper()?.validate()?;
        if self.converge.n_seeds == 0 || self.converge.levels.is_empty() {
            return Err(Error::Config("converge needs at least one seed and one level".into()));
        }
        if !(self.probe.horizon > 0.0) || self.probe.dts.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config("probe needs a positive horizon and positive dts".into()));
        }
        match self.model.kind {
            ModelKind::HeavyTop => self.heavy_top_params().validate(),
            ModelKind::SineEuler => self.sine_euler_params().validate(),
        }
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn method(&self) -> Result<Method> {
        self.run.method.parse()
    }

    pub fn compare_methods(&self) -> Result<Vec<Method>> {
        self.compare.methods.iter().map(|m| m.parse()).collect()
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        Ok(StepperConfig {
            method: self.method()?,
            chord_tol: self.solver.chord_tol,
            chord_max_iter: self.solver.chord_max_iter,
            dexpinv_order: self.solver.dexpinv_order,
            tableau: None,
        })
    }

    pub fn heavy_top_params(&self) -> HeavyTopParams {
        let h = &self.heavy_top;
        HeavyTopParams {
            inertia: h.inertia,
            chi: h.chi,
            alpha: h.alpha,
            pi0: h.pi0,
            gamma0: h.gamma0,
        }
    }

    pub fn sine_euler_params(&self) -> SineEulerParams {
        let s = &self.sine_euler;
        SineEulerParams {
            n: s.n,
            noise_modes: s
                .noise_modes
                .iter()
                .map(|m| NoiseMode { mode: m.mode, amplitude: m.amplitude })
                .collect(),
            init: s
                .init
                .iter()
                .map(|v| ModeValue { mode: v.mode, re: v.re, im: v.im })
                .collect(),
            init_seed: s.init_seed,
        }
    }

    pub fn build_model(&self) -> Result<Model> {
        match self.model.kind {
            ModelKind::HeavyTop => build_heavy_top(&self.heavy_top_params()),
            ModelKind::SineEuler => build_sine_euler(&self.sine_euler_params()),
        }
    }
}
