//! Concrete experiments: benchmark state sets, the H₂ autoencoder and
//! cart-pole control.

pub mod autoencoder;
pub mod benchmark;
pub mod cartpole;
pub mod policy;

pub use autoencoder::{
    autoencoder_cost, default_h2_coefficients, load_h2_coefficients, run_autoencoder_strategy, AutoencoderConfig,
    AutoencoderResult, AutoencoderStrategy, AutoencoderTask,
};
pub use benchmark::{benchmark_training_set, BenchmarkName};
pub use cartpole::{Action, CartPoleConfig, CartPoleEnv, CartPoleState};
pub use policy::{
    episode_fitness, policy_forward, random_policy_fitness, CartPoleFitness, CompiledPolicy, PolicyEncoding,
};
