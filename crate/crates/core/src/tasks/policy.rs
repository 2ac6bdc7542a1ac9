//! A QONN as a stochastic cart-pole policy.
//!
//! The four observables are squashed to angles `γ ∈ [0, π/2]` and loaded as
//! dual-rail qubits `cos γ|0⟩ + sin γ|1⟩`. One Fock outcome is sampled from
//! the network output; more photons in mode 0 than in mode 1 pushes left,
//! anything else pushes right.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cartpole::{Action, CartPoleConfig, CartPoleEnv, CartPoleState};
use crate::error::{Error, Result};
use crate::fock::{encode_dual_rail, DualRailRegister, FockBasis, QuantumState};
use crate::model::{CompiledQonn, QonnModel};
use crate::optimizers::Fitness;

pub const POLICY_QUBITS: usize = 4;
const INPUTS: usize = 1 << POLICY_QUBITS;

/// Clip range `[lo, hi]` for each of `(x, ẋ, θ, θ̇)`, mapped affinely onto
/// `[0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyEncoding {
    pub ranges: [[f64; 2]; 4],
}

impl Default for PolicyEncoding {
    fn default() -> Self {
        let theta = 12f64.to_radians();
        Self {
            ranges: [[-2.4, 2.4], [-3.0, 3.0], [-theta, theta], [-3.0, 3.0]],
        }
    }
}

impl PolicyEncoding {
    pub fn validate(&self) -> Result<()> {
        if self
            .ranges
            .iter()
            .any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo < hi))
        {
            return Err(Error::InvalidArgument("every clip range needs finite lo < hi".into()));
        }
        Ok(())
    }

    pub fn gammas(&self, obs: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| {
            let [lo, hi] = self.ranges[i];
            (obs[i].clamp(lo, hi) - lo) / (hi - lo) * FRAC_PI_2
        })
    }

    /// Real amplitudes over the 16 logical basis states, qubit 0 most significant.
    pub fn logical_amplitudes(&self, obs: &[f64; 4]) -> [f64; INPUTS] {
        let cs = self.gammas(obs).map(|g| g.sin_cos());
        std::array::from_fn(|bits| {
            (0..POLICY_QUBITS)
                .map(|q| {
                    let (sin, cos) = cs[q];
                    if bits >> (POLICY_QUBITS - 1 - q) & 1 == 1 {
                        sin
                    } else {
                        cos
                    }
                })
                .product()
        })
    }

    pub fn input_state(&self, obs: &[f64; 4]) -> Result<QuantumState> {
        let amps: Vec<Complex64> = self
            .logical_amplitudes(obs)
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect();
        encode_dual_rail(&amps)
    }
}

fn action_for(occupation: &[usize]) -> Action {
    if occupation[0] > occupation[1] {
        Action::Left
    } else {
        Action::Right
    }
}

/// Samples a full Fock outcome from the network output and reads off the
/// action.
pub fn policy_forward(
    model: &CompiledQonn,
    encoding: &PolicyEncoding,
    obs: &[f64; 4],
    rng: &mut impl Rng,
) -> Result<Action> {
    model.basis().check_dims(POLICY_QUBITS, 2 * POLICY_QUBITS)?;
    let out = model.forward(&encoding.input_state(obs)?)?;
    let probs = out.probabilities();
    let total: f64 = probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let basis = out.basis();
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(action_for(basis.state(i)));
        }
    }
    Ok(action_for(basis.state(probs.len() - 1)))
}

/// A policy with the network's response to all 16 logical inputs
/// precomputed. Since the encoded input is a real combination `Σ c_b |b⟩`,
/// the probability of pushing left is the quadratic form `cᵀ M c` with
/// `M_{bb'} = Re Σ_{k ∈ left} R_b[k]* R_b'[k]`.
#[derive(Debug, Clone)]
pub struct CompiledPolicy {
    encoding: PolicyEncoding,
    left: [[f64; INPUTS]; INPUTS],
}

impl CompiledPolicy {
    pub fn new(model: &QonnModel, encoding: PolicyEncoding) -> Result<Self> {
        encoding.validate()?;
        let compiled = model.compile()?;
        let basis: &Arc<FockBasis> = compiled.basis();
        basis.check_dims(POLICY_QUBITS, 2 * POLICY_QUBITS)?;
        let codes = DualRailRegister::new(POLICY_QUBITS)?.code_indices()?;
        let left_outcomes: Vec<usize> = (0..basis.len())
            .filter(|&k| action_for(basis.state(k)) == Action::Left)
            .collect();
        let responses: Vec<Vec<Complex64>> = codes
            .iter()
            .map(|&idx| {
                let mut e = vec![Complex64::new(0.0, 0.0); basis.len()];
                e[idx] = Complex64::new(1.0, 0.0);
                let out = compiled.forward_amplitudes(&e);
                left_outcomes.iter().map(|&k| out[k]).collect()
            })
            .collect();
        let mut left = [[0.0; INPUTS]; INPUTS];
        for a in 0..INPUTS {
            for b in a..INPUTS {
                let v: f64 = responses[a]
                    .iter()
                    .zip(&responses[b])
                    .map(|(x, y)| (x.conj() * y).re)
                    .sum();
                left[a][b] = v;
                left[b][a] = v;
            }
        }
        Ok(Self { encoding, left })
    }

    pub fn encoding(&self) -> &PolicyEncoding {
        &self.encoding
    }

    /// Exact probability that the sampled outcome pushes left.
    pub fn left_probability(&self, obs: &[f64; 4]) -> f64 {
        let c = self.encoding.logical_amplitudes(obs);
        let mut p = 0.0;
        for (a, row) in self.left.iter().enumerate() {
            p += c[a] * row.iter().zip(&c).map(|(m, cb)| m * cb).sum::<f64>();
        }
        p.clamp(0.0, 1.0)
    }

    pub fn act(&self, obs: &[f64; 4], rng: &mut impl Rng) -> Action {
        if rng.random::<f64>() < self.left_probability(obs) {
            Action::Left
        } else {
            Action::Right
        }
    }
}

/// Steps survived in one episode. The seed drives both the initial state and
/// the per-step action samples.
pub fn episode_fitness(policy: &CompiledPolicy, env: &CartPoleConfig, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = CartPoleEnv::random(*env, &mut rng)?;
    env.run(|s: &CartPoleState| policy.act(&s.as_array(), &mut rng))
}

/// Fitness of a policy that pushes left or right with probability 1/2.
pub fn random_policy_fitness(env: &CartPoleConfig, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = CartPoleEnv::random(*env, &mut rng)?;
    env.run(|_| {
        if rng.random::<bool>() {
            Action::Left
        } else {
            Action::Right
        }
    })
}

/// ES objective: one cart-pole episode per run, with the network phases as
/// parameters.
#[derive(Debug, Clone)]
pub struct CartPoleFitness {
    pub template: QonnModel,
    pub encoding: PolicyEncoding,
    pub env: CartPoleConfig,
}

impl Fitness for CartPoleFitness {
    type Prepared = Option<CompiledPolicy>;

    fn prepare(&self, x: &[f64]) -> Option<CompiledPolicy> {
        let model = self.template.with_theta(x).ok()?;
        CompiledPolicy::new(&model, self.encoding).ok()
    }

    fn run(&self, prepared: &Option<CompiledPolicy>, seed: u64) -> f64 {
        match prepared {
            Some(p) => episode_fitness(p, &self.env, seed).map_or(f64::NAN, |s| s as f64),
            None => f64::NAN,
        }
    }
}
