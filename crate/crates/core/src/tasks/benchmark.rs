//! Fixed state-transformation sets used to benchmark trainability.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState};
use crate::model::{Provenance, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkName {
    Bell,
    Cnot,
    Ghz,
}

impl BenchmarkName {
    pub const ALL: [BenchmarkName; 3] = [BenchmarkName::Bell, BenchmarkName::Cnot, BenchmarkName::Ghz];

    /// `(photons, modes)` of the task's basis.
    pub fn dims(self) -> (usize, usize) {
        match self {
            BenchmarkName::Bell | BenchmarkName::Cnot => (2, 4),
            BenchmarkName::Ghz => (3, 6),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkName::Bell => "bell",
            BenchmarkName::Cnot => "cnot",
            BenchmarkName::Ghz => "ghz",
        }
    }
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchmarkName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown benchmark `{s}` (expected bell, cnot or ghz)")))
    }
}

const H: f64 = FRAC_1_SQRT_2;

fn state(n: usize, m: usize, terms: &[(&[usize], f64)]) -> Result<QuantumState> {
    let basis = FockBasis::shared(n, m)?;
    let terms: Vec<(&[usize], Complex64)> = terms.iter().map(|&(o, a)| (o, Complex64::new(a, 0.0))).collect();
    QuantumState::superposition(basis, &terms)
}

fn ket(occ: &[usize]) -> Result<QuantumState> {
    state(occ.iter().sum(), occ.len(), &[(occ, 1.0)])
}

/// The benchmark's input/target pairs. Kets are written as mode occupations,
/// so `|1010⟩` is the dual-rail logical `|00⟩`.
pub fn benchmark_training_set(name: BenchmarkName) -> Result<TrainingSet> {
    const Q00: &[usize] = &[1, 0, 1, 0];
    const Q01: &[usize] = &[1, 0, 0, 1];
    const Q10: &[usize] = &[0, 1, 1, 0];
    const Q11: &[usize] = &[0, 1, 0, 1];
    let pairs = match name {
        BenchmarkName::Bell => vec![
            (state(2, 4, &[(Q00, H), (Q11, H)])?, ket(Q00)?),
            (state(2, 4, &[(Q00, H), (Q11, -H)])?, ket(Q01)?),
            (state(2, 4, &[(Q01, H), (Q10, H)])?, ket(Q10)?),
            (state(2, 4, &[(Q01, H), (Q10, -H)])?, ket(Q11)?),
        ],
        BenchmarkName::Cnot => vec![
            (ket(Q00)?, ket(Q00)?),
            (ket(Q01)?, ket(Q01)?),
            (ket(Q10)?, ket(Q11)?),
            (ket(Q11)?, ket(Q10)?),
        ],
        BenchmarkName::Ghz => {
            let a: &[usize] = &[1, 0, 1, 0, 1, 0];
            let b: &[usize] = &[0, 1, 0, 1, 0, 1];
            vec![(ket(a)?, state(3, 6, &[(a, H), (b, H)])?)]
        }
    };
    Ok(TrainingSet::new(pairs)?.with_provenance(Provenance {
        hamiltonian: format!("benchmark:{name}"),
        parameters: serde_json::Value::Null,
        seed: 0,
    }))
}
