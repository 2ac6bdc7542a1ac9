//! Ising and Bose-Hubbard Hamiltonians, exact time evolution, and generation
//! of input/output pairs for learning `exp(−iHt)`.
//!
//! Spin states use the computational basis with qubit 0 as the most
//! significant bit; spin up is logical `|0⟩`, i.e. `|10⟩` in dual rail.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{encode_dual_rail, FockBasis, QuantumState};
use crate::matrix::{norm_sqr, ComplexMatrix, ZERO};
use crate::model::{Provenance, TrainingSet};
use crate::rng::substream;

/// Largest `‖H − H†‖_F` accepted by [`evolve_exact`].
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingSpec {
    pub n_spins: usize,
    /// Transverse field `B`.
    pub b: f64,
    /// Coupling `J`.
    pub j: f64,
    pub couplings: Vec<[usize; 2]>,
    /// Evolution time.
    pub t: f64,
}

impl IsingSpec {
    /// Open chain `(0,1), (1,2), …`.
    pub fn chain(n_spins: usize, b: f64, j: f64, t: f64) -> Self {
        Self {
            n_spins,
            b,
            j,
            couplings: (1..n_spins).map(|i| [i - 1, i]).collect(),
            t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::InvalidArgument("Ising model needs at least one spin".into()));
        }
        check_pairs(&self.couplings, self.n_spins, "coupling")
    }
}

fn check_pairs(pairs: &[[usize; 2]], size: usize, what: &str) -> Result<()> {
    for p in pairs {
        if p[0] >= size || p[1] >= size || p[0] == p[1] {
            return Err(Error::InvalidArgument(format!("{what} {p:?} invalid for {size} sites")));
        }
    }
    Ok(())
}

/// `B Σᵢ Xᵢ + J Σ_⟨i,j⟩ ZᵢZⱼ` on `2^n` computational states.
pub fn ising_matrix(spec: &IsingSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = spec.n_spins;
    let dim = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut h = ComplexMatrix::zeros(dim, dim);
    for idx in 0..dim {
        for q in 0..n {
            h[(idx ^ bit(q), idx)] += spec.b;
        }
        let zz: f64 = spec
            .couplings
            .iter()
            .map(|&[a, b]| {
                let za = if idx & bit(a) == 0 { 1.0 } else { -1.0 };
                let zb = if idx & bit(b) == 0 { 1.0 } else { -1.0 };
                za * zb
            })
            .sum();
        h[(idx, idx)] += spec.j * zz;
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoseHubbardSpec {
    pub n_photons: usize,
    pub m_sites: usize,
    /// On-site potential `ω`.
    pub omega: f64,
    pub t_hop: f64,
    /// On-site interaction `U`.
    pub u: f64,
    /// Undirected lattice edges; both hopping directions are included.
    pub edges: Vec<[usize; 2]>,
    pub t: f64,
}

impl BoseHubbardSpec {
    /// The 2×2 plaquette on four sites: `(0,1), (1,3), (3,2), (2,0)`.
    pub fn plaquette_edges() -> Vec<[usize; 2]> {
        vec![[0, 1], [1, 3], [3, 2], [2, 0]]
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_sites == 0 {
            return Err(Error::InvalidArgument("lattice needs at least one site".into()));
        }
        check_pairs(&self.edges, self.m_sites, "edge")
    }
}

/// `ω Σ nᵢ − t_hop Σ_⟨i,j⟩ (b†ᵢbⱼ + b†ⱼbᵢ) + U/2 Σ nᵢ(nᵢ − 1)` on a fixed-`n` basis.
pub fn bose_hubbard_matrix(spec: &BoseHubbardSpec, basis: &FockBasis) -> Result<ComplexMatrix> {
    spec.validate()?;
    basis.check_dims(spec.n_photons, spec.m_sites)?;
    let dim = basis.len();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (col, occ) in basis.states().iter().enumerate() {
        let total: usize = occ.iter().sum();
        let onsite: f64 = occ.iter().map(|&k| (k * k.saturating_sub(1)) as f64).sum();
        h[(col, col)] += spec.omega * total as f64 + 0.5 * spec.u * onsite;
        for &[a, b] in &spec.edges {
            for (to, from) in [(a, b), (b, a)] {
                if occ[from] == 0 {
                    continue;
                }
                let amp = (((occ[to] + 1) * occ[from]) as f64).sqrt();
                let mut next = occ.clone();
                next[to] += 1;
                next[from] -= 1;
                let row = basis.index_of(&next).expect("hopping conserves photon number");
                h[(row, col)] -= spec.t_hop * amp;
            }
        }
    }
    Ok(h)
}

/// `exp(−iHt)` for a Hermitian `H`, by Padé scaling and squaring.
///
/// nalgebra's Hermitian eigensolver leaves residuals near 1e−7 on some
/// small nondegenerate matrices, which shows up as energy drift; the Padé
/// exponential stays at roundoff.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let deviation = h.hermiticity_deviation();
    if !(deviation <= HERMITICITY_TOLERANCE) {
        return Err(Error::NotHermitian { deviation });
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    let generator = h.to_nalgebra() * Complex64::new(0.0, -t);
    Ok(ComplexMatrix::from_nalgebra(&generator.exp()))
}

/// `exp(−iHt)·ψ`.
pub fn evolve_exact(h: &ComplexMatrix, t: f64, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    propagator(h, t)?.mul_vec(psi)
}

/// `⟨ψ|H|ψ⟩` (real part).
pub fn energy(h: &ComplexMatrix, psi: &[Complex64]) -> Result<f64> {
    let hpsi = h.mul_vec(psi)?;
    Ok(psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum())
}

/// A Haar-random pure state: i.i.d. complex normals, normalized.
pub fn haar_random_state(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = norm_sqr(&v).sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

/// Draws `k_train + k_test` Haar-random inputs, one ChaCha stream per sample,
/// and pairs each with its image under `evolution`.
fn sample_pairs(
    dim: usize,
    evolution: &ComplexMatrix,
    k_train: usize,
    k_test: usize,
    seed: u64,
    stream: &str,
    wrap: impl Fn(Vec<Complex64>) -> Result<QuantumState>,
) -> Result<(Vec<(QuantumState, QuantumState)>, Vec<(QuantumState, QuantumState)>)> {
    let mut all = Vec::with_capacity(k_train + k_test);
    for i in 0..(k_train + k_test) {
        let mut rng = substream(seed, stream, i as u64);
        let input = haar_random_state(dim, &mut rng);
        let output = evolution.mul_vec(&input)?;
        all.push((wrap(input)?, wrap(output)?));
    }
    let test = all.split_off(k_train);
    Ok((all, test))
}

fn finish(pairs: Vec<(QuantumState, QuantumState)>, provenance: &Provenance) -> Result<TrainingSet> {
    Ok(TrainingSet::new(pairs)?.with_provenance(provenance.clone()))
}

/// Haar-random spin states evolved under the Ising model, dual-rail encoded
/// onto `(n, 2n)`.
pub fn make_ising_training_data(
    spec: &IsingSpec,
    k_train: usize,
    k_test: usize,
    seed: u64,
) -> Result<(TrainingSet, TrainingSet)> {
    let h = ising_matrix(spec)?;
    let evolution = propagator(&h, spec.t)?;
    let (train, test) = sample_pairs(h.rows(), &evolution, k_train, k_test, seed, "train-data", |v| {
        let renorm = renormalize(v);
        encode_dual_rail(&renorm)
    })?;
    let provenance = Provenance {
        hamiltonian: "ising".into(),
        parameters: serde_json::to_value(spec)?,
        seed,
    };
    Ok((finish(train, &provenance)?, finish(test, &provenance)?))
}

/// Haar-random states on the full `(n, m)` Fock basis evolved under
/// Bose-Hubbard.
pub fn make_bh_training_data(
    spec: &BoseHubbardSpec,
    k_train: usize,
    k_test: usize,
    seed: u64,
) -> Result<(TrainingSet, TrainingSet)> {
    let basis = FockBasis::shared(spec.n_photons, spec.m_sites)?;
    let h = bose_hubbard_matrix(spec, &basis)?;
    let evolution = propagator(&h, spec.t)?;
    let (train, test) = sample_pairs(basis.len(), &evolution, k_train, k_test, seed, "train-data", |v| {
        QuantumState::normalized(Arc::clone(&basis), v)
    })?;
    let provenance = Provenance {
        hamiltonian: "bose_hubbard".into(),
        parameters: serde_json::to_value(spec)?,
        seed,
    };
    Ok((finish(train, &provenance)?, finish(test, &provenance)?))
}

fn renormalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = norm_sqr(&v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|a| *a /= norm);
    }
    v
}

/// Computational basis vector `bits` on `qubits` qubits.
pub fn computational_state(qubits: usize, bits: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; 1 << qubits];
    v[bits] = Complex64::new(1.0, 0.0);
    v
}
