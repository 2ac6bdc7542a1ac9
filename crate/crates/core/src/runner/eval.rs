use std::path::Path;

use serde::Serialize;

use super::logical_probabilities;
use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::model::QonnModel;

/// Output of a checkpointed network on one probe state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutput {
    pub probabilities: Vec<f64>,
    /// Dual-rail computational-basis probabilities, when `m = 2n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logical: Option<Vec<f64>>,
}

/// Loads a checkpoint, re-validating its shape, mask and phase count.
pub fn load_checkpoint(path: &Path) -> Result<QonnModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: QonnModel = serde_json::from_str(&text)?;
    QonnModel::new(
        raw.photons(),
        raw.modes(),
        raw.layers(),
        raw.phi(),
        raw.theta().to_vec(),
    )?
    .with_mask(raw.mask().map(<[_]>::to_vec))
    .map(|m| m.with_propagation(raw.propagation()))
}

/// Reads a JSON list of states.
pub fn load_probes(path: &Path) -> Result<Vec<QuantumState>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn evaluate_checkpoint(model: &QonnModel, probes: &[QuantumState]) -> Result<Vec<ProbeOutput>> {
    let compiled = model.compile()?;
    probes
        .iter()
        .map(|probe| {
            let out = compiled.forward(probe)?;
            Ok(ProbeOutput {
                probabilities: out.probabilities(),
                logical: logical_probabilities(&out)?,
            })
        })
        .collect()
}
