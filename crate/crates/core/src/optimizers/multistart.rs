use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::local::{minimize_local, LocalResult, LocalSearchConfig};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Seeded-uniform restarts of the local search.
///
/// Each start is drawn uniformly from `[lower, upper)ᵈ` on the "init"
/// substream. A candidate closer than `rejection_radius` (Euclidean) to an
/// earlier start or to an optimum already found is redrawn, up to
/// `max_redraws` times; after that the start is skipped and recorded as such.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiStartConfig {
    pub starts: usize,
    pub local: LocalSearchConfig,
    pub rejection_radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub max_redraws: usize,
    /// Skip remaining starts once one reaches `local.target`.
    pub stop_at_target: bool,
}

impl Default for MultiStartConfig {
    fn default() -> Self {
        Self {
            starts: 1,
            local: LocalSearchConfig::default(),
            rejection_radius: 0.0,
            lower: 0.0,
            upper: 2.0 * PI,
            max_redraws: 100,
            stop_at_target: false,
        }
    }
}

impl MultiStartConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidArgument("starts must be at least 1".into()));
        }
        if !(self.rejection_radius >= 0.0 && self.rejection_radius.is_finite()) {
            return Err(Error::InvalidArgument(
                "rejection_radius must be a non-negative number".into(),
            ));
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::InvalidArgument("start box needs finite lower < upper".into()));
        }
        self.local.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub index: usize,
    pub x0: Vec<f64>,
    /// Candidates that were redrawn for lying inside a known basin.
    pub redraws: usize,
    /// `None` when the start was skipped.
    pub result: Option<LocalResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    /// Index of the start that produced the best point.
    pub best_start: usize,
    pub starts: Vec<StartRecord>,
}

impl MultiStartResult {
    pub fn evaluations(&self) -> usize {
        self.starts
            .iter()
            .filter_map(|s| s.result.as_ref())
            .map(|r| r.evaluations)
            .sum()
    }

    pub fn completed(&self) -> impl Iterator<Item = &LocalResult> {
        self.starts.iter().filter_map(|s| s.result.as_ref())
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The starting point used by start `index`. Exposed so a single start can be
/// replayed without rerunning the others.
pub fn start_point(seed: u64, index: usize, dim: usize, config: &MultiStartConfig, attempt: usize) -> Vec<f64> {
    let mut rng = substream(seed, "init", ((index as u64) << 16) | attempt as u64);
    (0..dim).map(|_| rng.random_range(config.lower..config.upper)).collect()
}

pub fn minimize_multistart<F>(f: F, dim: usize, config: &MultiStartConfig, seed: u64) -> Result<MultiStartResult>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut records: Vec<StartRecord> = Vec::with_capacity(config.starts);
    let mut known: Vec<Vec<f64>> = Vec::new();
    let mut best: Option<(usize, Vec<f64>, f64)> = None;

    for index in 0..config.starts {
        if config.stop_at_target {
            if let (Some(t), Some((_, _, bf))) = (config.local.target, &best) {
                if *bf <= t {
                    break;
                }
            }
        }
        let mut redraws = 0;
        let mut x0 = start_point(seed, index, dim, config, 0);
        let mut accepted = true;
        if config.rejection_radius > 0.0 {
            while known.iter().any(|k| distance(k, &x0) < config.rejection_radius) {
                if redraws == config.max_redraws {
                    accepted = false;
                    break;
                }
                redraws += 1;
                x0 = start_point(seed, index, dim, config, redraws);
            }
        }
        if !accepted {
            records.push(StartRecord {
                index,
                x0,
                redraws,
                result: None,
            });
            continue;
        }
        let r = minimize_local(&f, &x0, &config.local)?;
        known.push(x0.clone());
        known.push(r.x.clone());
        if best.as_ref().is_none_or(|(_, _, bf)| r.f < *bf) {
            best = Some((index, r.x.clone(), r.f));
        }
        records.push(StartRecord {
            index,
            x0,
            redraws,
            result: Some(r),
        });
    }

    let (best_start, best_x, best_f) =
        best.ok_or_else(|| Error::InvalidArgument("every start was rejected as a duplicate".into()))?;
    Ok(MultiStartResult {
        best_x,
        best_f,
        best_start,
        starts: records,
    })
}
