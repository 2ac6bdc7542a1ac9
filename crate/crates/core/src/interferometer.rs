//! Programmable linear interferometers and their multi-photon action.
//!
//! An `m`-mode mesh is a triangular (Reck) arrangement of `m(m−1)/2`
//! two-mode units. Each unit acting on modes `(i, i+1)` is
//!
//! ```text
//! T(θ, φ) = B · diag(e^{iθ}, 1) · B · diag(e^{iφ}, 1),   B = [[1, i], [i, 1]] / √2
//!         = ½ [[(e^{iθ} − 1)·e^{iφ},  i(e^{iθ} + 1)],
//!              [i(e^{iθ} + 1)·e^{iφ},  1 − e^{iθ}  ]]
//! ```
//!
//! so `θ = φ = π` is the identity and `θ = π/2, φ = 2π` is the balanced
//! splitter `e^{3iπ/4}·[[1, 1], [1, −1]]/√2`.
//!
//! Units are applied diagonal by diagonal: diagonal `d` (for `d = 0..m−1`)
//! applies units on pairs `(d, d+1), (d−1, d), …, (0, 1)` in that order. The
//! phase vector stores `[θ₀, φ₀, θ₁, φ₁, …]` in application order.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState};
use crate::matrix::{ComplexMatrix, ZERO};
use crate::permanent::{permanent_fast, repeated_modes};

/// Largest `‖U†U − I‖_F` accepted by [`lift_to_fock`].
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

/// The identity setting of a unit.
pub const IDENTITY_PHASES: (f64, f64) = (PI, PI);

pub type TwoByTwo = [[Complex64; 2]; 2];

pub fn unit_matrix(theta: f64, phi: f64) -> TwoByTwo {
    let et = Complex64::from_polar(1.0, theta);
    let ep = Complex64::from_polar(1.0, phi);
    let i = Complex64::i();
    let half = 0.5;
    [
        [(et - 1.0) * ep * half, i * (et + 1.0) * half],
        [i * (et + 1.0) * ep * half, (1.0 - et) * half],
    ]
}

/// Wraps a phase into `(0, 2π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w == 0.0 {
        TAU
    } else {
        w
    }
}

/// Upper mode of every unit of an `m`-mode triangular mesh, in application order.
pub fn reck_layout(m: usize) -> Vec<usize> {
    let mut layout = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for d in 0..m.saturating_sub(1) {
        layout.extend((0..=d).rev());
    }
    layout
}

pub fn phase_count(m: usize) -> usize {
    m * m.saturating_sub(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshParams {
    m: usize,
    phases: Vec<f64>,
}

impl MeshParams {
    pub fn new(m: usize, phases: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("mesh needs at least one mode".into()));
        }
        if phases.len() != phase_count(m) {
            return Err(Error::DimensionMismatch {
                expected: phase_count(m),
                found: phases.len(),
            });
        }
        Ok(Self { m, phases })
    }

    /// Every unit at its identity point.
    pub fn identity(m: usize) -> Result<Self> {
        let units = phase_count(m) / 2;
        let phases = (0..units)
            .flat_map(|_| [IDENTITY_PHASES.0, IDENTITY_PHASES.1])
            .collect();
        Self::new(m, phases)
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `(upper mode, θ, φ)` for every unit in application order.
    pub fn units(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        reck_layout(self.m)
            .into_iter()
            .zip(self.phases.chunks_exact(2))
            .map(|(upper, p)| (upper, p[0], p[1]))
    }
}

#[derive(Serialize, Deserialize)]
struct MeshRecord {
    m: usize,
    phases: Vec<f64>,
}

impl Serialize for MeshParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeshRecord {
            m: self.m,
            phases: self.phases.iter().copied().map(wrap_phase).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeshParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = MeshRecord::deserialize(d)?;
        MeshParams::new(rec.m, rec.phases).map_err(serde::de::Error::custom)
    }
}

/// Phases i.i.d. uniform on `(0, 2π]`, deterministic in `seed`.
pub fn random_mesh(m: usize, seed: u64) -> Result<MeshParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = (0..phase_count(m)).map(|_| random_phase(&mut rng)).collect();
    MeshParams::new(m, phases)
}

pub(crate) fn random_phase(rng: &mut impl Rng) -> f64 {
    TAU * (1.0 - rng.random::<f64>())
}

fn apply_unit_rows(u: &mut ComplexMatrix, upper: usize, t: &TwoByTwo) {
    for col in 0..u.cols() {
        let a = u[(upper, col)];
        let b = u[(upper + 1, col)];
        u[(upper, col)] = t[0][0] * a + t[0][1] * b;
        u[(upper + 1, col)] = t[1][0] * a + t[1][1] * b;
    }
}

/// The `m×m` single-photon unitary of a mesh.
pub fn mesh_to_unitary(params: &MeshParams) -> ComplexMatrix {
    mesh_to_unitary_masked(params, None)
}

/// As [`mesh_to_unitary`], with units whose `active` flag is false held at identity.
pub fn mesh_to_unitary_masked(params: &MeshParams, active: Option<&[bool]>) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(params.m);
    for (k, (upper, theta, phi)) in params.units().enumerate() {
        if active.is_some_and(|a| !a[k]) {
            continue;
        }
        apply_unit_rows(&mut u, upper, &unit_matrix(theta, phi));
    }
    u
}

/// A linear-optical unitary lifted to a fixed-photon-number Fock space.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    basis: Arc<FockBasis>,
    matrix: ComplexMatrix,
}

impl TransferMatrix {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        self.basis.check_same(state.basis())?;
        Ok(QuantumState::from_raw(
            Arc::clone(&self.basis),
            self.matrix.mul_vec_unchecked(state.amplitudes()),
        ))
    }
}

/// Per-basis-state data reused across every entry of a lift.
struct LiftPrep {
    modes: Vec<Vec<usize>>,
    inv_sqrt_fact: Vec<f64>,
}

fn prepare(basis: &FockBasis) -> LiftPrep {
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    LiftPrep {
        modes: basis.states().iter().map(|s| repeated_modes(s)).collect(),
        inv_sqrt_fact: basis
            .states()
            .iter()
            .map(|s| 1.0 / s.iter().map(|&k| fact(k)).product::<f64>().sqrt())
            .collect(),
    }
}

/// `⟨T|Φ(U)|S⟩ = perm(U[T, S]) / √(∏T! ∏S!)` for every pair of basis states.
pub fn lift_to_fock(u: &ComplexMatrix, basis: &Arc<FockBasis>) -> Result<TransferMatrix> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    if u.rows() != basis.modes() {
        return Err(Error::DimensionMismatch {
            expected: basis.modes(),
            found: u.rows(),
        });
    }
    let deviation = u.unitarity_deviation();
    if !(deviation <= UNITARITY_TOLERANCE) {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(TransferMatrix {
        basis: Arc::clone(basis),
        matrix: lift_unchecked(u, basis),
    })
}

const PARALLEL_LIFT_MIN_DIM: usize = 64;

pub(crate) fn lift_unchecked(u: &ComplexMatrix, basis: &FockBasis) -> ComplexMatrix {
    let n = basis.photons();
    let dim = basis.len();
    let prep = prepare(basis);
    let row = |t: usize| -> Vec<Complex64> {
        let mut sub = vec![ZERO; n * n];
        let mut scratch = vec![ZERO; n];
        let out_modes = &prep.modes[t];
        (0..dim)
            .map(|s| {
                let in_modes = &prep.modes[s];
                for (r, &row_mode) in out_modes.iter().enumerate() {
                    for (c, &col_mode) in in_modes.iter().enumerate() {
                        sub[r * n + c] = u[(row_mode, col_mode)];
                    }
                }
                permanent_fast(&sub, n, &mut scratch) * (prep.inv_sqrt_fact[t] * prep.inv_sqrt_fact[s])
            })
            .collect()
    };
    let rows: Vec<Vec<Complex64>> = if dim >= PARALLEL_LIFT_MIN_DIM {
        (0..dim).into_par_iter().map(row).collect()
    } else {
        (0..dim).map(row).collect()
    };
    ComplexMatrix::new(dim, dim, rows.concat()).expect("lift dimensions")
}

/// `k`-photon lift of a 2×2 unitary by binomial expansion of
/// `(t₀₀a₀† + t₁₀a₁†)ᵖ (t₀₁a₀† + t₁₁a₁†)^q |0⟩`. Row and column `i` stand
/// for the occupation `(k − i, i)`.
fn two_mode_block(t: &TwoByTwo, k: usize) -> ComplexMatrix {
    let fact: Vec<f64> = (0..=k)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
    let choose = |n: usize, r: usize| fact[n] / (fact[r] * fact[n - r]);
    let mut out = ComplexMatrix::zeros(k + 1, k + 1);
    for col in 0..=k {
        let (p, q) = (k - col, col);
        for r in 0..=p {
            let a = t[0][0].powu(r as u32) * t[1][0].powu((p - r) as u32) * choose(p, r);
            for s in 0..=q {
                let b = t[0][1].powu(s as u32) * t[1][1].powu((q - s) as u32) * choose(q, s);
                let c = r + s;
                let norm = (fact[c] * fact[k - c] / (fact[p] * fact[q])).sqrt();
                out[(k - c, col)] += a * b * norm;
            }
        }
    }
    out
}

/// Fock-space action of one two-mode unit, split by the photon count `k`
/// held by the pair: block `k` is `(k+1)×(k+1)` over occupations
/// `(k,0), (k−1,1), …, (0,k)`.
#[derive(Debug, Clone)]
struct UnitBlocks {
    upper: usize,
    blocks: Vec<ComplexMatrix>,
}

impl UnitBlocks {
    fn new(upper: usize, t: &TwoByTwo, max_photons: usize) -> Self {
        let blocks = (0..=max_photons).map(|k| two_mode_block(t, k)).collect();
        Self { upper, blocks }
    }

    fn apply_in_place(&self, basis: &FockBasis, amps: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let orbits = basis.pair_orbits(self.upper);
        for (o, &k) in orbits.counts.iter().enumerate() {
            let members = &orbits.indices[orbits.offsets[o]..orbits.offsets[o + 1]];
            if k == 0 {
                continue;
            }
            let block = &self.blocks[k];
            scratch.clear();
            scratch.extend(members.iter().map(|&i| amps[i]));
            for (r, &dst) in members.iter().enumerate() {
                amps[dst] = block.row(r).iter().zip(scratch.iter()).map(|(a, b)| a * b).sum();
            }
        }
    }
}

/// A compiled mesh that applies itself to Fock-space states, either through
/// the full permanent-built transfer matrix or one two-mode unit at a time.
#[derive(Debug, Clone)]
pub struct MeshPropagator {
    inner: Propagation,
}

#[derive(Debug, Clone)]
enum Propagation {
    Dense(TransferMatrix),
    Unitwise {
        basis: Arc<FockBasis>,
        units: Vec<UnitBlocks>,
    },
}

impl MeshPropagator {
    pub fn dense(params: &MeshParams, active: Option<&[bool]>, basis: &Arc<FockBasis>) -> Result<Self> {
        let u = mesh_to_unitary_masked(params, active);
        Ok(Self {
            inner: Propagation::Dense(lift_to_fock(&u, basis)?),
        })
    }

    pub fn unitwise(params: &MeshParams, active: Option<&[bool]>, basis: &Arc<FockBasis>) -> Result<Self> {
        if params.modes() != basis.modes() {
            return Err(Error::DimensionMismatch {
                expected: basis.modes(),
                found: params.modes(),
            });
        }
        let units = params
            .units()
            .enumerate()
            .filter(|(k, _)| active.is_none_or(|a| a[*k]))
            .map(|(_, (upper, theta, phi))| UnitBlocks::new(upper, &unit_matrix(theta, phi), basis.photons()))
            .collect();
        Ok(Self {
            inner: Propagation::Unitwise {
                basis: Arc::clone(basis),
                units,
            },
        })
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.inner, Propagation::Dense(_))
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        match &self.inner {
            Propagation::Dense(t) => t.basis(),
            Propagation::Unitwise { basis, .. } => basis,
        }
    }

    /// Applies the mesh to an amplitude vector in the propagator's basis.
    pub fn apply_amplitudes(&self, amps: &[Complex64]) -> Vec<Complex64> {
        match &self.inner {
            Propagation::Dense(t) => t.matrix.mul_vec_unchecked(amps),
            Propagation::Unitwise { basis, units } => {
                let mut out = amps.to_vec();
                let mut scratch = Vec::with_capacity(basis.photons() + 1);
                for u in units {
                    u.apply_in_place(basis, &mut out, &mut scratch);
                }
                out
            }
        }
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        self.basis().check_same(state.basis())?;
        Ok(QuantumState::from_raw(
            Arc::clone(self.basis()),
            self.apply_amplitudes(state.amplitudes()),
        ))
    }
}
