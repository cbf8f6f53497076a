//! Experiment configuration, read from and written to TOML.

use ecav_core::physics::problems::Problem;
use ecav_core::physics::FluxKind;
use ecav_core::refelem::Formulation;
use ecav_core::timeint::Method;
use ecav_core::viscosity::Regularization;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    Burgers2d,
    Vortex,
    Contact,
    ContactSmooth,
    ShockVortex,
    DensityWave,
    ShuOsher,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ViscosityMode {
    EcavLdg,
    EcavBr1,
    Sc,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FormulationId {
    Modal,
    Nodal,
}

impl From<FormulationId> for Formulation {
    fn from(f: FormulationId) -> Self {
        match f {
            FormulationId::Modal => Formulation::Modal,
            FormulationId::Nodal => Formulation::Nodal,
        }
    }
}

/// How the L² error against an exact solution is reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorNorm {
    /// `‖u_h − u‖ / ‖u‖` over all conserved variables.
    Relative,
    /// `‖u_h − u‖` over all conserved variables.
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxId {
    Hllc,
    LaxFriedrichs,
    BurgersEc,
}

impl From<FluxId> for FluxKind {
    fn from(f: FluxId) -> Self {
        match f {
            FluxId::Hllc => FluxKind::Hllc,
            FluxId::LaxFriedrichs => FluxKind::LaxFriedrichs,
            FluxId::BurgersEc => FluxKind::BurgersEntropyConservative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegularizationConfig {
    Absolute { value: f64 },
    Ulp,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        RegularizationConfig::Absolute { value: 1e-14 }
    }
}

impl From<RegularizationConfig> for Regularization {
    fn from(r: RegularizationConfig) -> Self {
        match r {
            RegularizationConfig::Absolute { value } => Regularization::Absolute(value),
            RegularizationConfig::Ulp => Regularization::Ulp,
        }
    }
}

/// Shock-capturing overrides; missing entries take the degree-based defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockCapConfig {
    pub s0: Option<f64>,
    pub kappa: Option<f64>,
    /// Ceiling as a multiple of `h`.
    pub eps0_scale: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// `ssprk43`, `rk4_fixed` or `rk5_adaptive`.
    pub method: String,
    pub t_final: f64,
    #[serde(default = "default_abstol")]
    pub abstol: f64,
    #[serde(default = "default_reltol")]
    pub reltol: f64,
    /// Fixed step; switches to a fixed-step march when present.
    pub dt: Option<f64>,
    pub dt_init: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// End an adaptive run after this many accepted steps, keeping what was recorded.
    pub stop_after: Option<usize>,
}

fn default_abstol() -> f64 {
    1e-6
}
fn default_reltol() -> f64 {
    1e-4
}
fn default_max_steps() -> usize {
    2_000_000
}

impl TimeConfig {
    pub fn method(&self) -> Result<Method, ConfigError> {
        self.method.parse().map_err(ConfigError::Invalid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Record every `stride`-th accepted step; the final step is always recorded.
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub schlieren: bool,
    /// Samples per element direction for field and Schlieren dumps.
    #[serde(default = "default_plot_points")]
    pub plot_points: usize,
}

fn one() -> usize {
    1
}
fn default_plot_points() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemId,
    /// `[lo, hi]` of the periodic box for problems with a free domain size.
    pub domain: Option<[f64; 2]>,
    pub degree: usize,
    /// `[K]` in 1D, `[Kx, Ky]` on triangles.
    pub elements: Vec<usize>,
    pub formulation: FormulationId,
    pub viscosity: ViscosityMode,
    pub flux: FluxId,
    #[serde(default)]
    pub regularization: RegularizationConfig,
    #[serde(default)]
    pub shock_capturing: ShockCapConfig,
    /// Volume quadrature exactness; defaults to the formulation's rule.
    pub quadrature_degree: Option<usize>,
    /// Defaults to absolute for the density wave, relative elsewhere.
    pub error_norm: Option<ErrorNorm>,
    pub time: TimeConfig,
    pub output: OutputConfig,
}

const PRESETS: &[(&str, &str)] = &[
    ("burgers2d", include_str!("../presets/burgers2d.toml")),
    ("vortex", include_str!("../presets/vortex.toml")),
    ("contact", include_str!("../presets/contact.toml")),
    ("contact-smooth", include_str!("../presets/contact-smooth.toml")),
    ("shock-vortex", include_str!("../presets/shock-vortex.toml")),
    ("density-wave", include_str!("../presets/density-wave.toml")),
    ("shu-osher", include_str!("../presets/shu-osher.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
        let cfg = Self::from_toml(text).map_err(|source| ConfigError::Parse {
            path: PathBuf::from(format!("presets/{name}.toml")),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::from_toml(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// A preset name or a path to a TOML file.
    pub fn resolve(name_or_path: &str) -> Result<Self, ConfigError> {
        match Self::preset(name_or_path) {
            Err(ConfigError::UnknownPreset(_)) => Self::load(Path::new(name_or_path)),
            other => other,
        }
    }

    pub fn error_norm(&self) -> ErrorNorm {
        self.error_norm.unwrap_or(match self.problem {
            ProblemId::DensityWave => ErrorNorm::Absolute,
            _ => ErrorNorm::Relative,
        })
    }

    pub fn problem(&self) -> Problem {
        let (lo, hi) = match self.domain {
            Some([lo, hi]) => (lo, hi),
            None => match self.problem {
                ProblemId::Vortex => (-10.0, 10.0),
                _ => (-1.0, 1.0),
            },
        };
        match self.problem {
            ProblemId::Burgers2d => Problem::BurgersGaussian,
            ProblemId::Vortex => Problem::IsentropicVortex { lo, hi },
            ProblemId::Contact => Problem::StationaryContact { smooth: false },
            ProblemId::ContactSmooth => Problem::StationaryContact { smooth: true },
            ProblemId::ShockVortex => Problem::ShockVortex,
            ProblemId::DensityWave => Problem::DensityWave { lo, hi },
            ProblemId::ShuOsher => Problem::ShuOsher,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let dim = self.problem().dim();
        if self.elements.len() != dim {
            return bad(format!("{} needs {dim} element counts, got {:?}", self.name, self.elements));
        }
        if self.elements.iter().any(|&k| k < 2) {
            return bad("at least two elements per direction".into());
        }
        if dim == 2 && self.formulation == FormulationId::Nodal {
            return bad("the nodal formulation is one-dimensional".into());
        }
        if self.formulation == FormulationId::Nodal && self.degree == 0 {
            return bad("nodal elements need N >= 1".into());
        }
        if self.domain.is_some() && !matches!(self.problem, ProblemId::Vortex | ProblemId::DensityWave) {
            return bad(format!("{:?} has a fixed domain", self.problem));
        }
        if let Some([lo, hi]) = self.domain {
            if !(lo < hi) {
                return bad(format!("empty domain [{lo}, {hi}]"));
            }
        }
        let scalar = self.problem().is_scalar();
        match (self.flux, scalar) {
            (FluxId::BurgersEc, false) => return bad("burgers-ec is a scalar flux".into()),
            (FluxId::Hllc, true) => return bad("hllc needs the Euler equations".into()),
            _ => {}
        }
        if self.viscosity == ViscosityMode::Sc && self.degree < 2 {
            return bad("shock capturing needs N >= 2".into());
        }
        let method = self.time.method()?;
        if !(self.time.t_final > 0.0) {
            return bad("t_final must be positive".into());
        }
        match self.time.dt {
            Some(dt) if !(dt > 0.0) => return bad("dt must be positive".into()),
            None if !method.is_adaptive() => return bad(format!("{} needs a fixed dt", method.name())),
            _ => {}
        }
        if !(self.time.abstol > 0.0 && self.time.reltol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.output.stride == 0 {
            return bad("output stride must be at least 1".into());
        }
        if let RegularizationConfig::Absolute { value } = self.regularization {
            if !(value > 0.0) {
                return bad("regularization must be positive".into());
            }
        }
        Ok(())
    }
}
