//! JSON experiment descriptions and their translation into core types.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adaptsync_core::coupling::{
    generate_complete, generate_random_symmetric, generate_small_world_weighted, SmallWorldParams,
};
use adaptsync_core::dynamics::MonotoneMap;
use adaptsync_core::oscillators::DEFAULT_INITIAL_SCALE;
use adaptsync_core::{
    CouplingMatrix, DynamicsMatrix, InnerCoupling, IntegratorConfig, Method, MonotoneCoupling,
    OscillatorModel, Scheme, SchemeConfig, SchemeKind, SyncCriteria, TimeVaryingCoupling,
};
use serde::{Deserialize, Serialize};

use crate::matrix_io::read_matrix;

#[derive(Debug, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    /// Dotted location of the offending field, e.g. `network.n_nodes`.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl ToString) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<OscillatorModel, ConfigError> {
        let mut model = OscillatorModel::from_name(&self.name).map_err(|e| ConfigError::new("model.name", e))?;
        for (key, value) in &self.params {
            model.set_param(key, *value).map_err(|e| ConfigError::new(format!("model.params.{key}"), e))?;
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSpec {
    SmallWorld {
        n_nodes: usize,
        #[serde(default = "default_mean_degree")]
        mean_degree: usize,
        #[serde(default = "default_rewire_prob")]
        rewire_prob: f64,
        #[serde(default)]
        symmetric: bool,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    Complete {
        n_nodes: usize,
    },
    RandomSymmetric {
        n_nodes: usize,
        edge_prob: f64,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    /// A matrix file; relative paths resolve against the config file.
    File {
        path: PathBuf,
    },
    Triad {
        p: [f64; 3],
    },
    /// `(1 + amplitude·sin(frequency·t))` times a constant base network.
    Modulated {
        base: Box<NetworkSpec>,
        amplitude: f64,
        frequency: f64,
    },
}

fn default_mean_degree() -> usize {
    4
}

fn default_rewire_prob() -> f64 {
    0.1
}

fn default_seed() -> u64 {
    1
}

fn default_alpha() -> f64 {
    1.0
}

fn default_scale() -> f64 {
    DEFAULT_INITIAL_SCALE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// `g(u) = u + tanh(u)`.
    Tanh,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: MethodName,
    pub step: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub divergence_guard: f64,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            method: MethodName::Rk4,
            step: d.step,
            t_end: d.t_end,
            record_stride: d.record_stride,
            divergence_guard: d.divergence_guard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Fraction of the model's attractor box to sample from.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { seed: default_seed(), scale: default_scale() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriteriaSpec {
    pub threshold: f64,
    pub relative: f64,
    pub window: f64,
    pub plateau_tol: f64,
}

impl Default for CriteriaSpec {
    fn default() -> Self {
        let d = SyncCriteria::default();
        Self { threshold: d.threshold, relative: d.relative, window: d.window, plateau_tol: d.plateau_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    pub model: ModelSpec,
    pub scheme: String,
    pub network: NetworkSpec,
    /// `Ã` or `Â` for the unknown-matrix and dominated schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptation: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<Nonlinearity>,
    #[serde(default)]
    pub allow_asymmetric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub criteria: CriteriaSpec,
    /// Reference strength for the Lyapunov column; `2·c(T)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_ref: Option<f64>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Parses one experiment or an array, reporting the field path on failure.
pub fn parse_experiments(text: &str) -> Result<Vec<Experiment>, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::new("<root>", e))?;
    let experiments = if value.is_array() {
        serde_path_to_error::deserialize::<_, Vec<Experiment>>(value)
    } else {
        serde_path_to_error::deserialize::<_, Experiment>(value).map(|e| vec![e])
    };
    let experiments = experiments.map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { "<root>".into() } else { path }, e.into_inner())
    })?;
    if experiments.is_empty() {
        return Err(ConfigError::new("<root>", "no experiments"));
    }
    Ok(experiments)
}

/// Reads a config file and anchors relative matrix paths at its directory.
pub fn load_experiments(path: &Path) -> Result<Vec<Experiment>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("<file>", format!("{}: {e}", path.display())))?;
    let mut experiments = parse_experiments(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for e in &mut experiments {
        e.network.anchor(base);
        if let Some(a) = &mut e.adaptation {
            a.anchor(base);
        }
    }
    Ok(experiments)
}

impl NetworkSpec {
    fn anchor(&mut self, base: &Path) {
        match self {
            Self::File { path } if path.is_relative() => {
                let joined = base.join(&*path);
                *path = std::path::absolute(&joined).unwrap_or(joined);
            }
            Self::Modulated { base: inner, .. } => inner.anchor(base),
            _ => {}
        }
    }

    /// Overrides the node count of generated networks.
    pub fn set_n_nodes(&mut self, n: usize) -> Result<(), String> {
        match self {
            Self::SmallWorld { n_nodes, .. }
            | Self::Complete { n_nodes }
            | Self::RandomSymmetric { n_nodes, .. } => {
                *n_nodes = n;
                Ok(())
            }
            Self::Modulated { base, .. } => base.set_n_nodes(n),
            Self::File { .. } => Err("the node count of a matrix file is fixed".into()),
            Self::Triad { .. } => Err("the three-node family has exactly 3 nodes".into()),
        }
    }

    pub fn build_constant(&self, at: &str) -> Result<CouplingMatrix, ConfigError> {
        let err = |e: &dyn ToString| ConfigError::new(at, e.to_string());
        match self {
            Self::SmallWorld { n_nodes, mean_degree, rewire_prob, symmetric, seed } => {
                generate_small_world_weighted(
                    SmallWorldParams {
                        n_nodes: *n_nodes,
                        mean_degree: *mean_degree,
                        rewire_prob: *rewire_prob,
                        symmetric: *symmetric,
                    },
                    *seed,
                )
                .map_err(|e| err(&e))
            }
            Self::Complete { n_nodes } => generate_complete(*n_nodes).map_err(|e| err(&e)),
            Self::RandomSymmetric { n_nodes, edge_prob, seed } => {
                generate_random_symmetric(*n_nodes, *edge_prob, *seed).map_err(|e| err(&e))
            }
            Self::File { path } => {
                let m = read_matrix(path).map_err(|e| err(&e))?;
                CouplingMatrix::new(m).map_err(|e| err(&e))
            }
            Self::Triad { .. } | Self::Modulated { .. } => {
                Err(ConfigError::new(at, "a constant matrix is required here"))
            }
        }
    }

    pub fn build(&self, at: &str) -> Result<DynamicsMatrix, ConfigError> {
        match self {
            Self::Triad { p } => TimeVaryingCoupling::circulant_triad(*p)
                .map(DynamicsMatrix::TimeVarying)
                .map_err(|e| ConfigError::new(at, e)),
            Self::Modulated { base, amplitude, frequency } => {
                let base = base.build_constant(&format!("{at}.base"))?;
                TimeVaryingCoupling::modulated(&base, *amplitude, *frequency)
                    .map(DynamicsMatrix::TimeVarying)
                    .map_err(|e| ConfigError::new(at, e))
            }
            _ => self.build_constant(at).map(DynamicsMatrix::Constant),
        }
    }
}

/// Everything needed to integrate one experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scheme: Scheme,
    pub model: OscillatorModel,
    pub x0: Vec<f64>,
    pub integrator: IntegratorConfig,
    pub criteria: SyncCriteria,
}

impl Experiment {
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        let model = self.model.build()?;
        let kind = SchemeKind::from_name(&self.scheme).ok_or_else(|| {
            let names: Vec<_> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
            ConfigError::new("scheme", format!("unknown scheme `{}` (expected one of {})", self.scheme, names.join(", ")))
        })?;
        let dynamics = self.network.build("network")?;
        let mut config = SchemeConfig::new(kind, dynamics)
            .alpha(self.alpha)
            .allow_asymmetric(self.allow_asymmetric);
        if let Some(a) = &self.adaptation {
            config = config.adaptation(a.build_constant("adaptation")?);
        }
        if let Some(g) = self.nonlinearity {
            let map = match g {
                Nonlinearity::Tanh => MonotoneMap::TanhAugmented,
                Nonlinearity::Identity => MonotoneMap::Identity,
            };
            config = config.nonlinearity(MonotoneCoupling::uniform(map));
        }
        if let Some(gamma) = &self.gamma {
            config = config.gamma(InnerCoupling::new(gamma.clone()).map_err(|e| ConfigError::new("gamma", e))?);
        }
        let scheme = Scheme::new(config).map_err(|e| ConfigError::new("scheme", e))?;

        if !(self.initial.scale.is_finite() && self.initial.scale > 0.0) {
            return Err(ConfigError::new("initial.scale", "must be positive"));
        }
        let x0 = adaptsync_core::initial_state(&model, scheme.n_nodes(), self.initial.scale, self.initial.seed);
        let i = &self.integrator;
        let integrator = IntegratorConfig {
            step: i.step,
            t_end: i.t_end,
            record_stride: i.record_stride,
            method: match i.method {
                MethodName::Rk4 => Method::Rk4,
                MethodName::Euler => Method::Euler,
            },
            divergence_guard: i.divergence_guard,
            record_states: false,
        };
        let c = &self.criteria;
        let criteria = SyncCriteria {
            threshold: c.threshold,
            relative: c.relative,
            window: c.window,
            plateau_tol: c.plateau_tol,
        };
        if let Some(c_ref) = self.c_ref {
            if !c_ref.is_finite() {
                return Err(ConfigError::new("c_ref", "must be finite"));
            }
        }
        Ok(Prepared { scheme, model, x0, integrator, criteria })
    }
}
