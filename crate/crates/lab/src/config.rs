//! Experiment configuration files.
//!
//! A config is a single JSON object. `params` is interpreted according to
//! `experiment`; unknown keys are rejected at both levels.

use std::path::{Path, PathBuf};

use indep_core::euclidean::TorusGrid;
use indep_core::spherical::SphereRegion;
use indep_core::{Configuration, RandomSource};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::LabCliError;

pub const MIN_SAMPLES: u64 = 1000;

/// Stream ids for inputs generated from the run seed. Estimators use
/// stream 0; grid `i` uses `GRID_STREAM_BASE + i`.
pub const GRID_STREAM_BASE: u64 = 1000;
pub const AUX_STREAM: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    IpEstimate,
    CountingProbe,
    EquicontinuityProbe,
    Intersect,
    CapPack,
    CapAvoider,
    ScaleScan,
    HarmonicsCheck,
    CapFourier,
    BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub params: serde_json::Value,
    pub seed: u64,
    pub samples: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `LAB_THREADS` overrides it. Results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Directory that relative input paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabCliError> {
        serde_json::from_str(text).map_err(|e| LabCliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, LabCliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabCliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn source(&self) -> RandomSource {
        RandomSource::new(self.seed)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Parses `params` into the experiment's parameter type.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T, LabCliError> {
        let value = if self.params.is_null() {
            serde_json::Value::Object(Default::default())
        } else {
            self.params.clone()
        };
        serde_json::from_value(value).map_err(|e| LabCliError::Validation(format!("params: {e}")))
    }

    pub fn typed_params(&self) -> Result<Params, LabCliError> {
        Ok(match self.experiment {
            ExperimentKind::IpEstimate => Params::IpEstimate(self.params()?),
            ExperimentKind::CountingProbe => Params::CountingProbe(self.params()?),
            ExperimentKind::EquicontinuityProbe => Params::Equicontinuity(self.params()?),
            ExperimentKind::Intersect => Params::Intersect(self.params()?),
            ExperimentKind::CapPack => Params::CapPack(self.params()?),
            ExperimentKind::CapAvoider => Params::CapAvoider(self.params()?),
            ExperimentKind::ScaleScan => Params::ScaleScan(self.params()?),
            ExperimentKind::HarmonicsCheck => Params::HarmonicsCheck(self.params()?),
            ExperimentKind::CapFourier => Params::CapFourier(self.params()?),
            ExperimentKind::BoundReport => Params::BoundReport(self.params()?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    IpEstimate(IpParams),
    CountingProbe(CountingParams),
    Equicontinuity(EquicontinuityParams),
    Intersect(IntersectParams),
    CapPack(CapPackParams),
    CapAvoider(CapAvoiderParams),
    ScaleScan(ScaleScanParams),
    HarmonicsCheck(HarmonicsParams),
    CapFourier(CapFourierParams),
    BoundReport(BoundParams),
}

/// How a torus grid is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    File {
        path: PathBuf,
    },
    Constant {
        d: usize,
        side: f64,
        n: usize,
        value: f64,
    },
    RandomBinary {
        d: usize,
        side: f64,
        n: usize,
        p: f64,
    },
    Blobs {
        d: usize,
        side: f64,
        n: usize,
        count: usize,
        r_min: f64,
        r_max: f64,
    },
}

impl GridSpec {
    /// `(d, side, n)` without building the grid; reads only the header of files.
    pub fn shape(&self, config: &ExperimentConfig) -> Result<(usize, f64, usize), LabCliError> {
        match self {
            GridSpec::File { path } => {
                let path = config.resolve(path);
                let bytes = std::fs::read(&path)
                    .map_err(|e| LabCliError::Validation(format!("grid file {}: {e}", path.display())))?;
                let g = TorusGrid::from_bytes(&bytes)?;
                Ok((g.dim(), g.side(), g.cells_per_axis()))
            }
            GridSpec::Constant { d, side, n, .. }
            | GridSpec::RandomBinary { d, side, n, .. }
            | GridSpec::Blobs { d, side, n, .. } => Ok((*d, *side, *n)),
        }
    }

    /// Builds grid number `index`; random kinds draw from stream
    /// `GRID_STREAM_BASE + index` of the run seed.
    pub fn build(&self, config: &ExperimentConfig, index: usize) -> Result<TorusGrid, LabCliError> {
        let source = RandomSource::with_stream(config.seed, GRID_STREAM_BASE + index as u64);
        Ok(match self {
            GridSpec::File { path } => TorusGrid::load(&config.resolve(path))?,
            GridSpec::Constant { d, side, n, value } => TorusGrid::constant(*d, *side, *n, *value)?,
            GridSpec::RandomBinary { d, side, n, p } => TorusGrid::random_binary(*d, *side, *n, *p, &source)?,
            GridSpec::Blobs {
                d,
                side,
                n,
                count,
                r_min,
                r_max,
            } => TorusGrid::random_blobs(*d, *side, *n, *count, *r_min, *r_max, &source)?,
        })
    }
}

pub fn configuration(label: &str, points: &[Vec<f64>]) -> Result<Configuration, LabCliError> {
    Ok(Configuration::from_points(label, points.to_vec())?)
}

fn default_label() -> String {
    "P".into()
}

/// Torus (`grid`) or sphere (`region`) domain; exactly one must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpParams {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub region: Option<SphereRegion>,
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_gamma() -> f64 {
    0.5
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_inner() -> u64 {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingParams {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub region: Option<SphereRegion>,
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_label")]
    pub label: String,
    pub deltas: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Cap samples per blur evaluation (sphere only).
    #[serde(default = "default_inner")]
    pub inner_samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquicontinuityParams {
    pub grid: GridSpec,
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_label")]
    pub label: String,
    pub perturb: f64,
    pub trials: usize,
}

/// Euclidean (`grids`, whole-cell translates) or spherical (`regions`,
/// Haar rotations). The run's `samples` is the point budget per placement;
/// `exact` replaces it by a full cell sweep on grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectParams {
    #[serde(default)]
    pub grids: Vec<GridSpec>,
    #[serde(default)]
    pub regions: Vec<SphereRegion>,
    pub placements: u64,
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapPackParams {
    pub d: usize,
    pub eps: f64,
    /// Smallest admissible cap; defaults to `eps/4`.
    #[serde(default)]
    pub min_radius: Option<f64>,
}

fn default_attempts() -> u64 {
    5000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapAvoiderParams {
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_label")]
    pub label: String,
    pub t: f64,
    #[serde(default = "default_attempts")]
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleScanParams {
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_label")]
    pub label: String,
    pub t_list: Vec<f64>,
    #[serde(default = "default_attempts")]
    pub attempts: u64,
}

fn default_deltas() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicsParams {
    pub d: usize,
    pub degrees: Vec<usize>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapFourierParams {
    pub d: usize,
    pub deltas: Vec<f64>,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtraConstruction {
    pub label: String,
    pub density: f64,
    pub certified: bool,
}

/// Bracket for a Euclidean configuration: the rasterized cube avoider on a
/// torus of side `side` with `n` cells per axis gives the lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_label")]
    pub label: String,
    pub side: f64,
    pub n: usize,
    /// Upper bounds; `1 − 1/k` is always included.
    #[serde(default)]
    pub ceilings: Vec<f64>,
    #[serde(default)]
    pub constructions: Vec<ExtraConstruction>,
}
