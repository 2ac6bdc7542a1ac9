//! Fitting a QONN to a training set with the multi-start local search.

use std::cell::RefCell;

use crate::error::Result;
use crate::model::{QonnModel, TrainingSet};
use crate::optimizers::{minimize_multistart, MultiStartConfig, MultiStartResult};

/// The outcome of [`fit`]: the best model found and every start's record.
/// Parameters in the search records are the trainable subset, in
/// [`QonnModel::trainable_indices`] order.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: QonnModel,
    pub cost: f64,
    pub search: MultiStartResult,
}

/// Replaces the trainable phases of `template` with `x`.
pub fn with_trainable(template: &QonnModel, indices: &[usize], x: &[f64]) -> Result<QonnModel> {
    let mut theta = template.theta().to_vec();
    for (&i, &v) in indices.iter().zip(x) {
        theta[i] = v;
    }
    template.with_theta(&theta)
}

/// Minimizes the training cost over the trainable phases of `template`,
/// starting from seeded uniform draws on the "init" substream.
pub fn fit(template: &QonnModel, set: &TrainingSet, config: &MultiStartConfig, seed: u64) -> Result<FitResult> {
    let mut base = template.clone();
    base.normalize_masked();
    let indices = base.trainable_indices();
    let scratch = RefCell::new(base.clone());
    let objective = |x: &[f64]| {
        let mut m = scratch.borrow_mut();
        let mut theta = base.theta().to_vec();
        for (&i, &v) in indices.iter().zip(x) {
            theta[i] = v;
        }
        if m.set_theta(&theta).is_err() {
            return f64::NAN;
        }
        m.compile().and_then(|c| c.cost(set)).unwrap_or(f64::NAN)
    };
    let search = minimize_multistart(objective, indices.len(), config, seed)?;
    let model = with_trainable(&base, &indices, &search.best_x)?;
    Ok(FitResult {
        cost: search.best_f,
        model,
        search,
    })
}
