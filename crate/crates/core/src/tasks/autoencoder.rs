//! Compressing H₂ ground states from four dual-rail qubits into one.
//!
//! Training states are `α|0011⟩ + β|1100⟩` on the `(4, 8)` basis. A perfect
//! encoder sends each to `|000⟩ ⊗ |ψᶜ⟩`, leaving the three reference qubits
//! in logical `|0⟩` and the information in the last qubit (modes 6 and 7).

use std::cell::RefCell;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{dual_rail_occupation, FockBasis, QuantumState, INPUT_NORM_TOLERANCE};
use crate::interferometer::random_phase;
use crate::model::{reference_mask, reference_probability, LayerMask, QonnModel};
use crate::optimizers::{minimize_local, LocalResult, LocalSearchConfig, StopReason};
use crate::rng::substream;

pub const QUBITS: usize = 4;
pub const REFERENCE_QUBITS: [usize; 3] = [0, 1, 2];

const DEFAULT_COEFFICIENTS: &str = include_str!("../../data/h2_sto3g.json");

/// Ground-state coefficients at one bond length: `α` multiplies `|0011⟩`,
/// `β` multiplies the Hartree-Fock determinant `|1100⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H2Coefficients {
    pub bond_length_angstrom: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl H2Coefficients {
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha[0], self.alpha[1])
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.beta[0], self.beta[1])
    }
}

/// The shipped H₂/STO-3G coefficients for bond lengths 0.5, 1.0, 1.5, 2.0 Å.
pub fn default_h2_coefficients() -> Vec<H2Coefficients> {
    serde_json::from_str(DEFAULT_COEFFICIENTS).expect("bundled coefficient file parses")
}

pub fn load_h2_coefficients(path: &Path) -> Result<Vec<H2Coefficients>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// `α|0011⟩ + β|1100⟩` on the `(4, 8)` basis.
pub fn h2_state(alpha: Complex64, beta: Complex64) -> Result<QuantumState> {
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let basis = FockBasis::shared(QUBITS, 2 * QUBITS)?;
    let low = dual_rail_occupation(0b0011, QUBITS);
    let high = dual_rail_occupation(0b1100, QUBITS);
    QuantumState::superposition(basis, &[(&low, alpha), (&high, beta)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderTask {
    states: Vec<QuantumState>,
    reference_qubits: Vec<usize>,
}

impl AutoencoderTask {
    pub fn new(states: Vec<QuantumState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument(
                "autoencoder needs at least one training state".into(),
            ));
        }
        for s in &states {
            s.basis().check_dims(QUBITS, 2 * QUBITS)?;
        }
        Ok(Self {
            states,
            reference_qubits: REFERENCE_QUBITS.to_vec(),
        })
    }

    pub fn from_coefficients(coefficients: &[H2Coefficients]) -> Result<Self> {
        let states = coefficients
            .iter()
            .map(|c| h2_state(c.alpha(), c.beta()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    pub fn h2_default() -> Result<Self> {
        Self::from_coefficients(&default_h2_coefficients())
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn reference_qubits(&self) -> &[usize] {
        &self.reference_qubits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoencoderStrategy {
    LocalStructured,
    GlobalStructured,
    GlobalUnstructured,
}

impl AutoencoderStrategy {
    pub fn is_structured(self) -> bool {
        !matches!(self, AutoencoderStrategy::GlobalUnstructured)
    }
}

impl fmt::Display for AutoencoderStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AutoencoderStrategy::LocalStructured => "local_structured",
            AutoencoderStrategy::GlobalStructured => "global_structured",
            AutoencoderStrategy::GlobalUnstructured => "global_unstructured",
        })
    }
}

/// Stage `s` couples only modes `2s..m`, so qubits below `s` stay untouched.
pub fn structured_mask(stages: usize, layers_per_stage: usize, m: usize) -> Vec<LayerMask> {
    (0..stages)
        .flat_map(|s| {
            let pairs: LayerMask = (2 * s..m.saturating_sub(1)).map(|i| [i, i + 1]).collect();
            std::iter::repeat_n(pairs, layers_per_stage)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoencoderConfig {
    pub strategy: AutoencoderStrategy,
    pub phi: f64,
    pub stages: usize,
    pub layers_per_stage: usize,
    pub restarts: usize,
    pub local: LocalSearchConfig,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            strategy: AutoencoderStrategy::GlobalStructured,
            phi: std::f64::consts::PI,
            stages: 3,
            layers_per_stage: 2,
            restarts: 1,
            local: LocalSearchConfig::default(),
        }
    }
}

impl AutoencoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 || self.stages > REFERENCE_QUBITS.len() {
            return Err(Error::InvalidArgument(format!(
                "stages must be in 1..={}, got {}",
                REFERENCE_QUBITS.len(),
                self.stages
            )));
        }
        if self.layers_per_stage == 0 || self.restarts == 0 {
            return Err(Error::InvalidArgument(
                "layers_per_stage and restarts must be positive".into(),
            ));
        }
        self.local.validate()
    }

    pub fn layers(&self) -> usize {
        self.stages * self.layers_per_stage
    }

    /// The untrained architecture for this strategy with the given phases.
    pub fn model(&self, theta: Vec<f64>) -> Result<QonnModel> {
        let m = 2 * QUBITS;
        let model = QonnModel::new(QUBITS, m, self.layers(), self.phi, theta)?;
        if self.strategy.is_structured() {
            model.with_mask(Some(structured_mask(self.stages, self.layers_per_stage, m)))
        } else {
            Ok(model)
        }
    }
}

fn mean_reference_fidelity(model: &QonnModel, inputs: &[Vec<Complex64>], mask: &[bool]) -> Result<f64> {
    let compiled = model.compile()?;
    let total: f64 = inputs
        .iter()
        .map(|a| reference_probability(&compiled.forward_amplitudes(a), mask))
        .sum();
    Ok(total / inputs.len() as f64)
}

/// `1 − mean` joint probability that qubits 0, 1 and 2 all read `|0⟩`.
pub fn autoencoder_cost(model: &QonnModel, task: &AutoencoderTask) -> Result<f64> {
    let basis = model.basis()?;
    basis.check_dims(QUBITS, 2 * QUBITS)?;
    let mask = reference_mask(&basis, task.reference_qubits());
    let inputs: Vec<Vec<Complex64>> = task.states().iter().map(|s| s.amplitudes().to_vec()).collect();
    Ok((1.0 - mean_reference_fidelity(model, &inputs, &mask)?).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    /// Reference fidelity on the qubits this stage is responsible for.
    pub fidelity: f64,
    pub evaluations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderRun {
    pub restart: usize,
    /// Final reference fidelity on qubits 0, 1 and 2.
    pub fidelity: f64,
    pub stages: Vec<StageRecord>,
    pub model: QonnModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderResult {
    pub strategy: AutoencoderStrategy,
    pub best: AutoencoderRun,
    pub runs: Vec<AutoencoderRun>,
}

/// Optimizes `model.theta[indices]` with the rest fixed.
fn optimize_subset(
    model: &mut QonnModel,
    indices: &[usize],
    local: &LocalSearchConfig,
    cost: impl Fn(&QonnModel) -> Result<f64>,
) -> Result<LocalResult> {
    let x0: Vec<f64> = indices.iter().map(|&i| model.theta()[i]).collect();
    let base = model.theta().to_vec();
    let scratch = RefCell::new(model.clone());
    let result = minimize_local(
        |x: &[f64]| {
            let mut m = scratch.borrow_mut();
            let mut theta = base.clone();
            for (&i, &v) in indices.iter().zip(x) {
                theta[i] = v;
            }
            m.set_theta(&theta).expect("same length");
            cost(&m).unwrap_or(f64::NAN)
        },
        &x0,
        local,
    )?;
    let mut theta = base;
    for (&i, &v) in indices.iter().zip(&result.x) {
        theta[i] = v;
    }
    model.set_theta(&theta)?;
    Ok(result)
}

fn run_once(task: &AutoencoderTask, config: &AutoencoderConfig, seed: u64, restart: usize) -> Result<AutoencoderRun> {
    let mut rng = substream(seed, "init", restart as u64);
    let n_params = config.layers() * crate::interferometer::phase_count(2 * QUBITS);
    let theta: Vec<f64> = (0..n_params).map(|_| random_phase(&mut rng)).collect();
    let mut model = config.model(theta)?;
    model.normalize_masked();

    let basis: Arc<FockBasis> = model.basis()?;
    let full_mask = reference_mask(&basis, task.reference_qubits());
    let inputs: Vec<Vec<Complex64>> = task.states().iter().map(|s| s.amplitudes().to_vec()).collect();
    let mut stages = Vec::new();

    if config.strategy == AutoencoderStrategy::LocalStructured {
        let per_layer = model.params_per_layer();
        let mut stage_inputs = inputs.clone();
        for s in 0..config.stages {
            let layers = s * config.layers_per_stage..(s + 1) * config.layers_per_stage;
            let qubits: Vec<usize> = (0..=s).collect();
            let mask = reference_mask(&basis, &qubits);
            let sub_theta = model.theta()[layers.start * per_layer..layers.end * per_layer].to_vec();
            let mut sub = QonnModel::new(QUBITS, 2 * QUBITS, config.layers_per_stage, config.phi, sub_theta)?
                .with_mask(model.mask().map(|m| m[layers.clone()].to_vec()))?;
            let indices = sub.trainable_indices();
            let r = optimize_subset(&mut sub, &indices, &config.local, |m| {
                mean_reference_fidelity(m, &stage_inputs, &mask).map(|f| 1.0 - f)
            })?;
            let mut theta = model.theta().to_vec();
            theta[layers.start * per_layer..layers.end * per_layer].copy_from_slice(sub.theta());
            model.set_theta(&theta)?;
            let compiled = sub.compile()?;
            stage_inputs = stage_inputs.iter().map(|a| compiled.forward_amplitudes(a)).collect();
            stages.push(StageRecord {
                stage: format!("stage{s}"),
                fidelity: 1.0 - r.f,
                evaluations: r.evaluations,
                stop: r.stop,
            });
        }
    }

    let indices = model.trainable_indices();
    let r = optimize_subset(&mut model, &indices, &config.local, |m| {
        mean_reference_fidelity(m, &inputs, &full_mask).map(|f| 1.0 - f)
    })?;
    stages.push(StageRecord {
        stage: if config.strategy == AutoencoderStrategy::LocalStructured {
            "refine".into()
        } else {
            "global".into()
        },
        fidelity: 1.0 - r.f,
        evaluations: r.evaluations,
        stop: r.stop,
    });
    let fidelity = mean_reference_fidelity(&model, &inputs, &full_mask)?;
    Ok(AutoencoderRun {
        restart,
        fidelity,
        stages,
        model,
    })
}

/// Trains the encoder with one strategy, best of `config.restarts` restarts.
pub fn run_autoencoder_strategy(
    task: &AutoencoderTask,
    config: &AutoencoderConfig,
    seed: u64,
) -> Result<AutoencoderResult> {
    config.validate()?;
    let runs = (0..config.restarts)
        .map(|r| run_once(task, config, seed, r))
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity).then(b.restart.cmp(&a.restart)))
        .cloned()
        .expect("at least one restart");
    Ok(AutoencoderResult {
        strategy: config.strategy,
        best,
        runs,
    })
}

/// Random phases for a model of this architecture (used by tests and probes).
pub fn random_theta(config: &AutoencoderConfig, rng: &mut impl Rng) -> Vec<f64> {
    let n = config.layers() * crate::interferometer::phase_count(2 * QUBITS);
    (0..n).map(|_| random_phase(rng)).collect()
}
