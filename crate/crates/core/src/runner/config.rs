//! Experiment configuration files.
//!
//! One JSON document per experiment. The `experiment` field selects the
//! study; every constant the study uses (Hamiltonian parameters, budgets, ES
//! hyperparameters, clip ranges) lives in the document so a run record fully
//! describes what produced it.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{BoseHubbardSpec, IsingSpec};
use crate::model::{LayerMask, Propagation, QonnModel};
use crate::optimizers::{EsConfig, MultiStartConfig};
use crate::tasks::{AutoencoderConfig, BenchmarkName, CartPoleConfig, PolicyEncoding};

fn default_phi() -> f64 {
    PI
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Network shape. `n` and `m` are implied by the task; when given they must
/// agree with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub layers: usize,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<LayerMask>>,
    #[serde(default)]
    pub propagation: Propagation,
}

impl ModelSpec {
    pub fn with_layers(layers: usize) -> Self {
        Self {
            n: None,
            m: None,
            layers,
            phi: PI,
            mask: None,
            propagation: Propagation::Auto,
        }
    }

    /// An identity-initialized model on the task's `(n, m)`.
    pub fn build(&self, n: usize, m: usize) -> Result<QonnModel> {
        if self.n.is_some_and(|v| v != n) || self.m.is_some_and(|v| v != m) {
            return Err(Error::config(
                "model",
                format!(
                    "model (n={:?}, m={:?}) does not match the task's (n={n}, m={m})",
                    self.n, self.m
                ),
            ));
        }
        Ok(QonnModel::identity(n, m, self.layers, self.phi)?
            .with_mask(self.mask.clone())?
            .with_propagation(self.propagation))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Layers,
    JOverB,
    UOverTHop,
    Restart,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Layers => "layers",
            SweepAxis::JOverB => "j_over_b",
            SweepAxis::UOverTHop => "u_over_t_hop",
            SweepAxis::Restart => "restart",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkExperiment {
    pub task: BenchmarkName,
    pub model: ModelSpec,
    #[serde(default)]
    pub optimizer: MultiStartConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingExperiment {
    pub hamiltonian: IsingSpec,
    pub k_train: usize,
    pub k_test: usize,
    pub model: ModelSpec,
    #[serde(default)]
    pub optimizer: MultiStartConfig,
    /// Computational basis state fed to the trained model afterwards;
    /// `0` is `|↑↑…⟩`.
    #[serde(default)]
    pub probe: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoseHubbardExperiment {
    pub hamiltonian: BoseHubbardSpec,
    pub k_train: usize,
    pub k_test: usize,
    pub model: ModelSpec,
    #[serde(default)]
    pub optimizer: MultiStartConfig,
}

/// Parsed by hand: the strategy settings sit at the top level next to
/// `coefficients`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutoencoderExperiment {
    #[serde(flatten)]
    pub autoencoder: AutoencoderConfig,
    /// Coefficient file; the bundled H₂/STO-3G set when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
}

impl AutoencoderExperiment {
    fn from_value(mut body: serde_json::Value) -> Result<Self> {
        let coefficients = match body.as_object_mut().and_then(|o| o.remove("coefficients")) {
            None | Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::String(p)) => Some(PathBuf::from(p)),
            Some(_) => return Err(Error::config("coefficients", "expected a file path")),
        };
        Ok(Self {
            autoencoder: parse(body)?,
            coefficients,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartpoleExperiment {
    pub model: ModelSpec,
    #[serde(default)]
    pub es: EsConfig,
    #[serde(default)]
    pub env: CartPoleConfig,
    #[serde(default)]
    pub encoding: PolicyEncoding,
    /// Episodes used to estimate the random-policy baseline.
    #[serde(default = "default_baseline_runs")]
    pub baseline_runs: usize,
}

fn default_baseline_runs() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Experiment {
    Benchmark(BenchmarkExperiment),
    HamsimIsing(IsingExperiment),
    HamsimBh(BoseHubbardExperiment),
    Autoencoder(AutoencoderExperiment),
    Cartpole(CartpoleExperiment),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Benchmark(_) => "benchmark",
            Experiment::HamsimIsing(_) => "hamsim_ising",
            Experiment::HamsimBh(_) => "hamsim_bh",
            Experiment::Autoencoder(_) => "autoencoder",
            Experiment::Cartpole(_) => "cartpole",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl<'de> Deserialize<'de> for ExperimentConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        Self::from_value(value).map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    /// Parses a config, reporting the JSON path of the first offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        // Parse to a value first so each section goes through the
        // path-tracking deserializer on its own.
        let value: serde_json::Value = serde_json::from_str(text)?;
        let config = Self::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn from_value(mut value: serde_json::Value) -> Result<Self> {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::config(".", "config must be a JSON object"))?;
        let mut common = serde_json::Map::new();
        for key in ["seed", "output_dir", "sweep"] {
            if let Some(v) = obj.remove(key) {
                common.insert(key.into(), v);
            }
        }
        if !common.contains_key("seed") {
            return Err(Error::config(
                "seed",
                "missing field `seed` (every run needs an explicit seed)",
            ));
        }
        let tag = obj
            .get("experiment")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::config("experiment", "missing or non-string `experiment` field"))?
            .to_string();
        obj.remove("experiment");
        let body = serde_json::Value::Object(std::mem::take(obj));
        let experiment = match tag.as_str() {
            "benchmark" => Experiment::Benchmark(parse(body)?),
            "hamsim_ising" => Experiment::HamsimIsing(parse(body)?),
            "hamsim_bh" => Experiment::HamsimBh(parse(body)?),
            "autoencoder" => Experiment::Autoencoder(AutoencoderExperiment::from_value(body)?),
            "cartpole" => Experiment::Cartpole(parse(body)?),
            other => {
                return Err(Error::config(
                    "experiment",
                    format!(
                        "unknown experiment `{other}` (expected benchmark, hamsim_ising, hamsim_bh, autoencoder or cartpole)"
                    ),
                ))
            }
        };
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Common {
            seed: u64,
            #[serde(default = "default_output_dir")]
            output_dir: PathBuf,
            #[serde(default)]
            sweep: Option<SweepSpec>,
        }
        let common: Common = parse(serde_json::Value::Object(common))?;
        Ok(Self {
            experiment,
            seed: common.seed,
            output_dir: common.output_dir,
            sweep: common.sweep,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::Benchmark(b) => {
                b.optimizer
                    .validate()
                    .map_err(|e| Error::config("optimizer", e.to_string()))?;
                let (n, m) = b.task.dims();
                b.model.build(n, m)?;
            }
            Experiment::HamsimIsing(i) => {
                i.hamiltonian
                    .validate()
                    .map_err(|e| Error::config("hamiltonian", e.to_string()))?;
                i.optimizer
                    .validate()
                    .map_err(|e| Error::config("optimizer", e.to_string()))?;
                check_sizes(i.k_train, i.k_test)?;
                if i.probe >= 1 << i.hamiltonian.n_spins {
                    return Err(Error::config("probe", "probe state index out of range"));
                }
                i.model.build(i.hamiltonian.n_spins, 2 * i.hamiltonian.n_spins)?;
            }
            Experiment::HamsimBh(h) => {
                h.hamiltonian
                    .validate()
                    .map_err(|e| Error::config("hamiltonian", e.to_string()))?;
                h.optimizer
                    .validate()
                    .map_err(|e| Error::config("optimizer", e.to_string()))?;
                check_sizes(h.k_train, h.k_test)?;
                h.model.build(h.hamiltonian.n_photons, h.hamiltonian.m_sites)?;
            }
            Experiment::Autoencoder(a) => {
                a.autoencoder
                    .validate()
                    .map_err(|e| Error::config("autoencoder", e.to_string()))?;
            }
            Experiment::Cartpole(c) => {
                c.es.validate().map_err(|e| Error::config("es", e.to_string()))?;
                c.env.validate().map_err(|e| Error::config("env", e.to_string()))?;
                c.encoding
                    .validate()
                    .map_err(|e| Error::config("encoding", e.to_string()))?;
                c.model.build(4, 8)?;
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("sweep.values", "sweep axis has no values"));
            }
            let ok = match (sweep.axis, &self.experiment) {
                (SweepAxis::Layers, Experiment::Autoencoder(_)) => false,
                (SweepAxis::Layers | SweepAxis::Restart, _) => true,
                (SweepAxis::JOverB, Experiment::HamsimIsing(_)) => true,
                (SweepAxis::UOverTHop, Experiment::HamsimBh(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::config(
                    "sweep.axis",
                    format!(
                        "axis `{}` does not apply to `{}`",
                        sweep.axis.as_str(),
                        self.experiment.name()
                    ),
                ));
            }
            if matches!(sweep.axis, SweepAxis::Layers | SweepAxis::Restart)
                && sweep.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0)
            {
                return Err(Error::config(
                    "sweep.values",
                    "layer and restart values must be whole numbers",
                ));
            }
        }
        Ok(())
    }

    /// The single-point config for one sweep value.
    pub fn sweep_point(&self, value: f64) -> Result<ExperimentConfig> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("sweep", "config declares no sweep"))?;
        let mut point = self.clone();
        point.sweep = None;
        match (sweep.axis, &mut point.experiment) {
            (SweepAxis::Layers, Experiment::Benchmark(b)) => b.model.layers = value as usize,
            (SweepAxis::Layers, Experiment::HamsimIsing(i)) => i.model.layers = value as usize,
            (SweepAxis::Layers, Experiment::HamsimBh(h)) => h.model.layers = value as usize,
            (SweepAxis::Layers, Experiment::Cartpole(c)) => c.model.layers = value as usize,
            (SweepAxis::JOverB, Experiment::HamsimIsing(i)) => i.hamiltonian.j = value * i.hamiltonian.b,
            (SweepAxis::UOverTHop, Experiment::HamsimBh(h)) => h.hamiltonian.u = value * h.hamiltonian.t_hop,
            (SweepAxis::Restart, _) => point.seed = crate::rng::derive_seed(self.seed, "restart", value as u64),
            (axis, e) => {
                return Err(Error::config(
                    "sweep.axis",
                    format!("axis `{}` does not apply to `{}`", axis.as_str(), e.name()),
                ))
            }
        }
        point.validate()?;
        Ok(point)
    }
}

fn check_sizes(k_train: usize, k_test: usize) -> Result<()> {
    if k_train == 0 || k_test == 0 {
        return Err(Error::config(
            "k_train",
            "training and test sets need at least one pair",
        ));
    }
    Ok(())
}

fn parse<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })
}
