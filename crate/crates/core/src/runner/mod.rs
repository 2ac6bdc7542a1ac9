//! Config-driven experiment runs with persisted records, checkpoints and
//! traces.

mod config;
mod eval;
mod sweep;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    AutoencoderExperiment, BenchmarkExperiment, BoseHubbardExperiment, CartpoleExperiment, Experiment,
    ExperimentConfig, IsingExperiment, ModelSpec, SweepAxis, SweepSpec,
};
pub use eval::{evaluate_checkpoint, load_checkpoint, load_probes, ProbeOutput};
pub use sweep::{run_sweep, SweepPoint, SweepSummary};

use crate::error::{Error, Result};
use crate::fock::{decode_dual_rail, encode_dual_rail, FockBasis, QuantumState};
use crate::hamiltonians::{
    computational_state, evolve_exact, ising_matrix, make_bh_training_data, make_ising_training_data,
};
use crate::model::{mean_test_error, QonnModel};
use crate::optimizers::{maximize_es, write_es_trace_csv, write_local_trace_csv, SUCCESS_THRESHOLD};
use crate::rng::derive_seed;
use crate::tasks::{
    benchmark_training_set, episode_fitness, load_h2_coefficients, random_policy_fitness, AutoencoderTask,
    CartPoleFitness, CompiledPolicy,
};
use crate::training::fit;

pub const RECORD_FILE: &str = "record.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TRACE_FILE: &str = "trace.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// Everything needed to audit or repeat a run. Metrics are deterministic
/// given the config; timing lives only in the timestamps and trace files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub details: serde_json::Value,
    pub trace_files: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
}

/// SHA-256 of the canonical config JSON, framed as `"blob {len}\0{json}"`.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let json = serde_json::to_string(config)?;
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", json.len()).as_bytes());
    hasher.update(json.as_bytes());
    Ok(hex::encode(hasher.finalize()))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// What an experiment produced, before it is wrapped in a [`RunRecord`].
struct Outcome {
    metrics: BTreeMap<String, f64>,
    details: serde_json::Value,
    trace_files: Vec<PathBuf>,
    checkpoint: Option<QonnModel>,
}

/// Runs one experiment, writing `record.json`, `checkpoint.json` and any
/// trace CSVs under `out_dir`. A failed run still writes its record; the
/// returned record's status says which happened.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunRecord> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let config_hash = config_hash(config)?;
    let started_at = now();
    info!(
        "running {} (seed {}, config {})",
        config.experiment.name(),
        config.seed,
        &config_hash[..12]
    );
    let outcome = execute(config, out_dir);
    let finished_at = now();
    let mut record = RunRecord {
        config: config.clone(),
        config_hash,
        started_at,
        finished_at,
        status: RunStatus::Ok,
        error: None,
        metrics: BTreeMap::new(),
        details: serde_json::Value::Null,
        trace_files: Vec::new(),
        checkpoint: None,
    };
    match outcome {
        Ok(o) => {
            if let Some(model) = &o.checkpoint {
                write_json(&out_dir.join(CHECKPOINT_FILE), model)?;
                record.checkpoint = Some(PathBuf::from(CHECKPOINT_FILE));
            }
            record.metrics = o.metrics;
            record.details = o.details;
            record.trace_files = o.trace_files;
        }
        Err(e) => {
            log::error!("{} failed: {e}", config.experiment.name());
            record.status = RunStatus::Failed;
            record.error = Some(e.to_string());
        }
    }
    write_json(&out_dir.join(RECORD_FILE), &record)?;
    Ok(record)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn execute(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome> {
    let seed = config.seed;
    match &config.experiment {
        Experiment::Benchmark(b) => {
            let set = benchmark_training_set(b.task)?;
            let (n, m) = b.task.dims();
            let template = b.model.build(n, m)?;
            let r = fit(&template, &set, &b.optimizer, seed)?;
            let mut metrics = search_metrics(&r.search);
            metrics.insert("train_cost".into(), r.cost);
            metrics.insert("success".into(), f64::from(u8::from(r.cost < SUCCESS_THRESHOLD)));
            let trace = write_best_trace(&r.search, out_dir)?;
            Ok(Outcome {
                metrics,
                details: start_details(&r.search),
                trace_files: trace,
                checkpoint: Some(r.model),
            })
        }
        Experiment::HamsimIsing(i) => {
            let spec = &i.hamiltonian;
            let (train, test) = make_ising_training_data(spec, i.k_train, i.k_test, seed)?;
            let template = i.model.build(spec.n_spins, 2 * spec.n_spins)?;
            let r = fit(&template, &train, &i.optimizer, seed)?;
            let mut metrics = search_metrics(&r.search);
            metrics.insert("train_cost".into(), r.cost);
            metrics.insert("test_error".into(), mean_test_error(&r.model, &test)?);

            // Compare the learned map with exact evolution on one basis state.
            let input = computational_state(spec.n_spins, i.probe);
            let exact = evolve_exact(&ising_matrix(spec)?, spec.t, &input)?;
            let predicted = r.model.compile()?.forward(&encode_dual_rail(&input)?)?;
            let (logical, leakage) = decode_dual_rail(&predicted, spec.n_spins)?;
            let predicted_p: Vec<f64> = logical.iter().map(|a| a.norm_sqr()).collect();
            let exact_p: Vec<f64> = exact.iter().map(|a| a.norm_sqr()).collect();
            let max_err = predicted_p
                .iter()
                .zip(&exact_p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            for (k, (p, e)) in predicted_p.iter().zip(&exact_p).enumerate() {
                let bits = format!("{k:0width$b}", width = spec.n_spins);
                metrics.insert(format!("probe_p_{bits}"), *p);
                metrics.insert(format!("exact_p_{bits}"), *e);
            }
            metrics.insert("probe_max_abs_error".into(), max_err);
            metrics.insert("probe_leakage".into(), leakage);
            let mut details = start_details(&r.search);
            details["probe"] = serde_json::json!({
                "input": i.probe,
                "predicted": predicted_p,
                "exact": exact_p,
                "leakage": leakage,
            });
            Ok(Outcome {
                metrics,
                details,
                trace_files: write_best_trace(&r.search, out_dir)?,
                checkpoint: Some(r.model),
            })
        }
        Experiment::HamsimBh(h) => {
            let spec = &h.hamiltonian;
            let (train, test) = make_bh_training_data(spec, h.k_train, h.k_test, seed)?;
            let template = h.model.build(spec.n_photons, spec.m_sites)?;
            let r = fit(&template, &train, &h.optimizer, seed)?;
            let mut metrics = search_metrics(&r.search);
            metrics.insert("train_cost".into(), r.cost);
            metrics.insert("test_error".into(), mean_test_error(&r.model, &test)?);
            Ok(Outcome {
                metrics,
                details: start_details(&r.search),
                trace_files: write_best_trace(&r.search, out_dir)?,
                checkpoint: Some(r.model),
            })
        }
        Experiment::Autoencoder(a) => {
            let task = match &a.coefficients {
                Some(path) => AutoencoderTask::from_coefficients(&load_h2_coefficients(path)?)?,
                None => AutoencoderTask::h2_default()?,
            };
            let r = crate::tasks::run_autoencoder_strategy(&task, &a.autoencoder, seed)?;
            let mut metrics = BTreeMap::new();
            metrics.insert("fidelity".into(), r.best.fidelity);
            metrics.insert("cost".into(), 1.0 - r.best.fidelity);
            for stage in &r.best.stages {
                metrics.insert(format!("{}_fidelity", stage.stage), stage.fidelity);
            }
            let evaluations: usize = r.runs.iter().flat_map(|run| &run.stages).map(|s| s.evaluations).sum();
            metrics.insert("evaluations".into(), evaluations as f64);
            let details = serde_json::json!({
                "strategy": r.strategy,
                "best_restart": r.best.restart,
                "runs": r.runs.iter().map(|run| serde_json::json!({
                    "restart": run.restart,
                    "fidelity": run.fidelity,
                    "stages": run.stages,
                })).collect::<Vec<_>>(),
            });
            Ok(Outcome {
                metrics,
                details,
                trace_files: Vec::new(),
                checkpoint: Some(r.best.model),
            })
        }
        Experiment::Cartpole(c) => {
            let template = c.model.build(4, 8)?;
            let x0 = QonnModel::random(4, 8, c.model.layers, c.model.phi, derive_seed(seed, "init", 0))?
                .theta()
                .to_vec();
            let fitness = CartPoleFitness {
                template: template.clone(),
                encoding: c.encoding,
                env: c.env,
            };
            let r = maximize_es(&fitness, &x0, &c.es, seed)?;
            let trace = out_dir.join(TRACE_FILE);
            write_es_trace_csv(&trace, &r.trace)?;
            let model = template.with_theta(&r.x_final)?;
            let policy = CompiledPolicy::new(&model, c.encoding)?;

            let mut trained = Vec::with_capacity(c.baseline_runs);
            let mut baseline = Vec::with_capacity(c.baseline_runs);
            for k in 0..c.baseline_runs as u64 {
                trained.push(episode_fitness(&policy, &c.env, derive_seed(seed, "evaluation", k))? as f64);
                baseline.push(random_policy_fitness(&c.env, derive_seed(seed, "baseline", k))? as f64);
            }
            let mut metrics = BTreeMap::new();
            if let Some(last) = r.trace.last() {
                metrics.insert("final_mean_fitness".into(), last.mean_fitness);
                metrics.insert("final_max_fitness".into(), last.max_fitness);
            }
            metrics.insert("generations".into(), r.trace.len() as f64);
            metrics.insert("policy_mean_fitness".into(), mean(&trained));
            metrics.insert("policy_median_fitness".into(), median(&mut trained));
            metrics.insert("random_mean_fitness".into(), mean(&baseline));
            metrics.insert("random_median_fitness".into(), median(&mut baseline));
            Ok(Outcome {
                metrics,
                details: serde_json::Value::Null,
                trace_files: vec![PathBuf::from(TRACE_FILE)],
                checkpoint: Some(model),
            })
        }
    }
}

fn search_metrics(search: &crate::optimizers::MultiStartResult) -> BTreeMap<String, f64> {
    let mut metrics = BTreeMap::new();
    metrics.insert("evaluations".into(), search.evaluations() as f64);
    metrics.insert("starts_completed".into(), search.completed().count() as f64);
    let successes = search.completed().filter(|r| r.f < SUCCESS_THRESHOLD).count();
    metrics.insert("successful_starts".into(), successes as f64);
    let completed = search.completed().count();
    if completed > 0 {
        metrics.insert("success_rate".into(), successes as f64 / completed as f64);
    }
    metrics
}

fn start_details(search: &crate::optimizers::MultiStartResult) -> serde_json::Value {
    let starts: Vec<_> = search
        .starts
        .iter()
        .map(|s| match &s.result {
            Some(r) => serde_json::json!({
                "index": s.index,
                "redraws": s.redraws,
                "cost": r.f,
                "evaluations": r.evaluations,
                "stop": r.stop,
            }),
            None => serde_json::json!({ "index": s.index, "redraws": s.redraws }),
        })
        .collect();
    serde_json::json!({ "best_start": search.best_start, "starts": starts })
}

fn write_best_trace(search: &crate::optimizers::MultiStartResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let best = search.starts.iter().find(|s| s.index == search.best_start);
    match best.and_then(|s| s.result.as_ref()) {
        Some(r) => {
            write_local_trace_csv(&out_dir.join(TRACE_FILE), &r.trace)?;
            Ok(vec![PathBuf::from(TRACE_FILE)])
        }
        None => Ok(Vec::new()),
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Computational-basis probabilities of a dual-rail `(q, 2q)` state.
pub(crate) fn logical_probabilities(state: &QuantumState) -> Result<Option<Vec<f64>>> {
    let basis: &Arc<FockBasis> = state.basis();
    let q = basis.photons();
    if basis.modes() != 2 * q {
        return Ok(None);
    }
    let (logical, _) = decode_dual_rail(state, q)?;
    Ok(Some(logical.iter().map(Complex64::norm_sqr).collect()))
}
