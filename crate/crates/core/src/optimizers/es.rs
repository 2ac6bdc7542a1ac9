use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

/// Evolution-strategy hyperparameters. `population` counts individual
/// evaluations, so it holds `population / 2` mirrored pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsConfig {
    pub population: usize,
    pub sigma: f64,
    pub learning_rate: f64,
    pub generations: usize,
    /// Independent runs averaged into each fitness value.
    pub fitness_runs: usize,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            population: 100,
            sigma: 0.1,
            learning_rate: 0.05,
            generations: 200,
            fitness_runs: 80,
        }
    }
}

impl EsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.population % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "population must be even and at least 2, got {}",
                self.population
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be non-negative".into()));
        }
        if self.fitness_runs == 0 {
            return Err(Error::InvalidArgument("fitness_runs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub mean_fitness: f64,
    pub max_fitness: f64,
    pub min_fitness: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsResult {
    pub x_final: Vec<f64>,
    /// Parameters at the start of every generation, then the final point.
    pub trajectory: Vec<Vec<f64>>,
    pub trace: Vec<GenerationStats>,
}

/// Centered ranks in `[-0.5, 0.5]`. Ties share their average rank.
pub fn rank_shape_fitness(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j - 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks.iter().map(|r| r / (n - 1) as f64 - 0.5).collect()
}

/// The seed handed to run `run` of generation `generation`. Every member of a
/// generation sees the same run seeds, so fitness differences within a
/// generation come from the parameters and not from the episode noise.
pub fn fitness_seed(seed: u64, generation: usize, run: usize) -> u64 {
    derive_seed(seed, "fitness", ((generation as u64) << 24) | run as u64)
}

fn noise(seed: u64, generation: usize, pair: usize, dim: usize) -> Vec<f64> {
    let mut rng = substream(seed, "es-noise", ((generation as u64) << 24) | pair as u64);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// A stochastic objective. `prepare` runs once per population member and
/// generation; `run` performs one independent run seeded by `seed`.
pub trait Fitness: Sync {
    type Prepared;

    fn prepare(&self, x: &[f64]) -> Self::Prepared;

    fn run(&self, prepared: &Self::Prepared, seed: u64) -> f64;
}

impl<F> Fitness for F
where
    F: Fn(&[f64], u64) -> f64 + Sync,
{
    type Prepared = Vec<f64>;

    fn prepare(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn run(&self, prepared: &Vec<f64>, seed: u64) -> f64 {
        self(prepared, seed)
    }
}

/// Maximizes a stochastic fitness with mirrored Gaussian perturbations and
/// rank shaping: `x ← x + α/(Pσ)·Σₚ wₚ εₚ`.
///
/// Each member's fitness is the mean over `fitness_runs` runs. Non-finite averages are replaced by the lowest
/// finite fitness of the generation.
pub fn maximize_es<F: Fitness>(fitness: &F, x0: &[f64], config: &EsConfig, seed: u64) -> Result<EsResult> {
    config.validate()?;
    let dim = x0.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("ES needs at least one parameter".into()));
    }
    let pairs = config.population / 2;
    let start = Instant::now();
    let mut x = x0.to_vec();
    let mut trajectory = Vec::with_capacity(config.generations + 1);
    let mut trace = Vec::with_capacity(config.generations);

    for g in 0..config.generations {
        trajectory.push(x.clone());
        let run_seeds: Vec<u64> = (0..config.fitness_runs).map(|r| fitness_seed(seed, g, r)).collect();
        let eps: Vec<Vec<f64>> = (0..pairs).map(|p| noise(seed, g, p, dim)).collect();

        // Member 2p is x + σεₚ, member 2p+1 is x − σεₚ.
        let mut raw: Vec<f64> = (0..config.population)
            .into_par_iter()
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let member: Vec<f64> = x
                    .iter()
                    .zip(&eps[k / 2])
                    .map(|(xi, e)| xi + sign * config.sigma * e)
                    .collect();
                let prepared = fitness.prepare(&member);
                run_seeds.iter().map(|&s| fitness.run(&prepared, s)).sum::<f64>() / config.fitness_runs as f64
            })
            .collect();

        let floor = raw
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        let floor = if floor.is_finite() { floor } else { 0.0 };
        raw.iter_mut().filter(|v| !v.is_finite()).for_each(|v| *v = floor);

        let w = rank_shape_fitness(&raw);
        let step = config.learning_rate / (config.population as f64 * config.sigma);
        for (p, e) in eps.iter().enumerate() {
            let c = step * (w[2 * p] - w[2 * p + 1]);
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += c * ei;
            }
        }

        trace.push(GenerationStats {
            generation: g,
            mean_fitness: raw.iter().sum::<f64>() / raw.len() as f64,
            max_fitness: raw.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_fitness: floor.min(raw.iter().copied().fold(f64::INFINITY, f64::min)),
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        log::debug!("es generation {g}: mean fitness {:.4}", trace[g].mean_fitness);
    }
    trajectory.push(x.clone());
    Ok(EsResult {
        x_final: x,
        trajectory,
        trace,
    })
}
