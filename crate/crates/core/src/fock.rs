//! Bosonic Fock bases, pure states over them, and the dual-rail qubit code.
//!
//! Basis states are occupation vectors ordered lexicographically
//! *descending*: for two photons in two modes the order is
//! `(2,0), (1,1), (0,2)`. Dual-rail qubit `k` lives on modes `(2k, 2k+1)`;
//! a photon in mode `2k` is logical `|0⟩`, a photon in mode `2k+1` is
//! logical `|1⟩`. Qubit 0 is the most significant bit of a computational
//! index.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{inner, norm_sqr, ZERO};

/// Tolerance on `|‖ψ‖ − 1|` accepted when constructing a state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Tolerance used when reading states from hand-written files; such states
/// are renormalized after the check.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-6;

pub type Occupation = Vec<usize>;

#[derive(Debug)]
pub struct FockBasis {
    n: usize,
    m: usize,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
    pair_orbits: OnceLock<Vec<PairOrbits>>,
}

/// Grouping of basis indices by the occupation of every mode except an
/// adjacent pair `(i, i+1)`. Used to apply two-mode operators in place.
#[derive(Debug)]
pub(crate) struct PairOrbits {
    /// Photon count held by the pair, one entry per orbit.
    pub counts: Vec<usize>,
    /// Offsets into `indices`; orbit `o` is `indices[offsets[o]..offsets[o + 1]]`.
    pub offsets: Vec<usize>,
    /// Basis indices, each orbit ordered by decreasing occupation of mode `i`.
    pub indices: Vec<usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m
    }
}

impl Eq for FockBasis {}

/// All occupation vectors of `n` photons in `m` modes.
pub fn enumerate_basis(n: usize, m: usize) -> Result<FockBasis> {
    if m == 0 {
        return Err(Error::InvalidArgument("mode count must be at least 1".into()));
    }
    let mut states = Vec::new();
    let mut current = vec![0; m];
    fill(&mut states, &mut current, 0, n);
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(FockBasis {
        n,
        m,
        states,
        index,
        pair_orbits: OnceLock::new(),
    })
}

fn fill(out: &mut Vec<Occupation>, current: &mut Occupation, mode: usize, remaining: usize) {
    if mode == current.len() - 1 {
        current[mode] = remaining;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[mode] = k;
        fill(out, current, mode + 1, remaining - k);
    }
    current[mode] = 0;
}

/// `C(n + m − 1, n)`, the number of ways to place `n` bosons in `m` modes.
pub fn basis_size(n: usize, m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    binomial(n + m - 1, n)
}

pub(crate) fn binomial(top: usize, k: usize) -> usize {
    if k > top {
        return 0;
    }
    let k = k.min(top - k);
    (0..k).fold(1usize, |acc, i| acc * (top - i) / (i + 1))
}

impl FockBasis {
    /// A process-wide shared instance for `(n, m)`.
    pub fn shared(n: usize, m: usize) -> Result<Arc<FockBasis>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<FockBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().unwrap().get(&(n, m)) {
            return Ok(Arc::clone(b));
        }
        let basis = Arc::new(enumerate_basis(n, m)?);
        let mut guard = cache.lock().unwrap();
        Ok(Arc::clone(guard.entry((n, m)).or_insert(basis)))
    }

    pub fn photons(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[usize] {
        &self.states[i]
    }

    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub(crate) fn check_same(&self, other: &FockBasis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch {
                expected_n: self.n,
                expected_m: self.m,
                found_n: other.n,
                found_m: other.m,
            });
        }
        Ok(())
    }

    pub(crate) fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        if self.n != n || self.m != m {
            return Err(Error::BasisMismatch {
                expected_n: n,
                expected_m: m,
                found_n: self.n,
                found_m: self.m,
            });
        }
        Ok(())
    }

    pub(crate) fn pair_orbits(&self, upper: usize) -> &PairOrbits {
        &self.pair_orbits.get_or_init(|| {
            (0..self.m.saturating_sub(1))
                .map(|i| self.build_pair_orbits(i))
                .collect()
        })[upper]
    }

    fn build_pair_orbits(&self, upper: usize) -> PairOrbits {
        let mut seen = vec![false; self.len()];
        let mut counts = Vec::new();
        let mut offsets = vec![0];
        let mut indices = Vec::with_capacity(self.len());
        for (idx, occ) in self.states.iter().enumerate() {
            if seen[idx] {
                continue;
            }
            let k = occ[upper] + occ[upper + 1];
            let mut member = occ.clone();
            for a in (0..=k).rev() {
                member[upper] = a;
                member[upper + 1] = k - a;
                let j = self.index[&member];
                seen[j] = true;
                indices.push(j);
            }
            counts.push(k);
            offsets.push(indices.len());
        }
        PairOrbits {
            counts,
            offsets,
            indices,
        }
    }
}

/// A pure state: unit-norm complex amplitudes over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl PartialEq for QuantumState {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis && self.amplitudes == other.amplitudes
    }
}

impl QuantumState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: amplitudes.len(),
            });
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(basis: Arc<FockBasis>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: amplitudes.len(),
            });
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { basis, amplitudes })
    }

    /// The basis state with the given occupation vector.
    pub fn from_occupation(basis: Arc<FockBasis>, occupation: &[usize]) -> Result<Self> {
        let idx = basis.index_of(occupation).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "occupation {occupation:?} is not in the (n={}, m={}) basis",
                basis.photons(),
                basis.modes()
            ))
        })?;
        let mut amplitudes = vec![ZERO; basis.len()];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    /// Normalized superposition of occupation vectors with given weights.
    pub fn superposition(basis: Arc<FockBasis>, terms: &[(&[usize], Complex64)]) -> Result<Self> {
        let mut amplitudes = vec![ZERO; basis.len()];
        for (occ, c) in terms {
            let idx = basis
                .index_of(occ)
                .ok_or_else(|| Error::InvalidArgument(format!("occupation {occ:?} not in basis")))?;
            amplitudes[idx] += c;
        }
        Self::normalized(basis, amplitudes)
    }

    pub(crate) fn from_raw(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.len());
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn amplitude_of(&self, occupation: &[usize]) -> Option<Complex64> {
        self.basis.index_of(occupation).map(|i| self.amplitudes[i])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        self.basis.check_same(&other.basis)?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn scaled(&self, phase: Complex64) -> QuantumState {
        Self {
            basis: Arc::clone(&self.basis),
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Number of qubits whose computational basis has `len` entries.
fn qubit_count(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "qubit amplitude vector must have length 2^q with q >= 1, got {len}"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Occupation vector of the dual-rail encoding of computational index `bits`.
pub fn dual_rail_occupation(bits: usize, qubits: usize) -> Occupation {
    let mut occ = vec![0; 2 * qubits];
    for k in 0..qubits {
        let bit = (bits >> (qubits - 1 - k)) & 1;
        occ[2 * k + bit] = 1;
    }
    occ
}

/// A register of `qubits` dual-rail qubits: `qubits` photons in `2·qubits` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualRailRegister {
    qubits: usize,
}

impl DualRailRegister {
    pub fn new(qubits: usize) -> Result<Self> {
        if qubits == 0 {
            return Err(Error::InvalidArgument("register needs at least one qubit".into()));
        }
        Ok(Self { qubits })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn basis(&self) -> Result<Arc<FockBasis>> {
        FockBasis::shared(self.qubits, 2 * self.qubits)
    }

    /// Basis index of each computational basis state, in computational order.
    pub fn code_indices(&self) -> Result<Vec<usize>> {
        let basis = self.basis()?;
        Ok((0..1usize << self.qubits)
            .map(|b| basis.index_of(&dual_rail_occupation(b, self.qubits)).unwrap())
            .collect())
    }
}

/// Maps a unit-norm vector over `2^q` computational states onto the `(q, 2q)`
/// Fock basis.
pub fn encode_dual_rail(qubit_amplitudes: &[Complex64]) -> Result<QuantumState> {
    let q = qubit_count(qubit_amplitudes.len())?;
    let norm = norm_sqr(qubit_amplitudes).sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let register = DualRailRegister::new(q)?;
    let basis = register.basis()?;
    let mut amplitudes = vec![ZERO; basis.len()];
    for (idx, &a) in register.code_indices()?.iter().zip(qubit_amplitudes) {
        amplitudes[*idx] = a;
    }
    Ok(QuantumState::from_raw(basis, amplitudes))
}

/// Projects a `(q, 2q)` state onto the dual-rail code space.
///
/// Returns the (unnormalized) logical amplitudes and the leakage, the
/// population outside the code space.
pub fn decode_dual_rail(state: &QuantumState, qubits: usize) -> Result<(Vec<Complex64>, f64)> {
    let register = DualRailRegister::new(qubits)?;
    state.basis().check_dims(qubits, 2 * qubits)?;
    let logical: Vec<Complex64> = register
        .code_indices()?
        .iter()
        .map(|&i| state.amplitudes()[i])
        .collect();
    let leakage = (1.0 - norm_sqr(&logical)).clamp(0.0, 1.0);
    Ok((logical, leakage))
}

#[derive(Serialize, Deserialize)]
struct StateRecord {
    n: usize,
    m: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for QuantumState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateRecord {
            n: self.basis.photons(),
            m: self.basis.modes(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = StateRecord::deserialize(deserializer)?;
        let basis = FockBasis::shared(rec.n, rec.m).map_err(D::Error::custom)?;
        let amplitudes: Vec<Complex64> = rec.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        if amplitudes.len() != basis.len() {
            return Err(D::Error::custom(format!(
                "expected {} amplitudes for (n={}, m={}), got {}",
                basis.len(),
                rec.n,
                rec.m,
                amplitudes.len()
            )));
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
            return Err(D::Error::custom(format!("state is not normalized (norm = {norm})")));
        }
        QuantumState::normalized(basis, amplitudes).map_err(D::Error::custom)
    }
}
