//! Derivative-free training: bounded local search, seeded multi-start and
//! evolution strategies.

mod es;
mod local;
mod multistart;
mod trace;

pub use es::{fitness_seed, maximize_es, rank_shape_fitness, EsConfig, EsResult, Fitness, GenerationStats};
pub use local::{minimize_local, LocalResult, LocalSearchConfig, StopReason, TracePoint};
pub use multistart::{minimize_multistart, start_point, MultiStartConfig, MultiStartResult, StartRecord};
pub use trace::{write_es_trace_csv, write_local_trace_csv};

/// Cost below which a benchmark training run counts as a success.
pub const SUCCESS_THRESHOLD: f64 = 1e-4;
