//! The layered network: `S(Θ) = ∏ᵢ Σ(φ)·U(θᵢ)`, applied right to left, so
//! each layer runs its interferometer first and the Kerr layer second.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState};
use crate::interferometer::{
    phase_count, random_phase, reck_layout, wrap_phase, MeshParams, MeshPropagator, IDENTITY_PHASES,
};
use crate::matrix::inner;

/// Bases up to this size use the dense permanent-built transfer matrix
/// under [`Propagation::Auto`]; larger ones apply units one at a time.
pub const AUTO_DENSE_MAX_DIM: usize = 64;

/// Default Kerr strength.
pub const DEFAULT_PHI: f64 = PI;

/// Strategy for applying each interferometer to Fock-space states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    #[default]
    Auto,
    /// Full transfer matrix from permanents, shared across all input states.
    Dense,
    /// Two-mode units applied one after another.
    Unitwise,
}

impl Propagation {
    fn is_auto(&self) -> bool {
        *self == Propagation::Auto
    }
}

/// Single-mode self-phase modulation with strength `phi` on every mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrLayer {
    pub phi: f64,
}

impl KerrLayer {
    /// Per-basis-state phase `exp(i·φ·Σⱼ max(Sⱼ − 1, 0))`.
    pub fn phases(&self, basis: &FockBasis) -> Vec<Complex64> {
        basis
            .states()
            .iter()
            .map(|s| {
                let extra: usize = s.iter().map(|&k| k.saturating_sub(1)).sum();
                Complex64::from_polar(1.0, self.phi * extra as f64)
            })
            .collect()
    }

    pub fn apply(&self, state: &QuantumState) -> QuantumState {
        let phases = self.phases(state.basis());
        let amps = state.amplitudes().iter().zip(&phases).map(|(a, p)| a * p).collect();
        QuantumState::from_raw(Arc::clone(state.basis()), amps)
    }
}

pub fn apply_kerr(state: &QuantumState, phi: f64) -> QuantumState {
    KerrLayer { phi }.apply(state)
}

/// Adjacent mode pairs a layer's mesh may couple, as `[i, i + 1]`.
pub type LayerMask = Vec<[usize; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QonnModel {
    n: usize,
    m: usize,
    layers: usize,
    phi: f64,
    #[serde(serialize_with = "serialize_wrapped")]
    theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<Vec<LayerMask>>,
    #[serde(default, skip_serializing_if = "Propagation::is_auto")]
    propagation: Propagation,
}

fn serialize_wrapped<S: serde::Serializer>(theta: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(theta.iter().copied().map(wrap_phase))
}

impl QonnModel {
    pub fn new(n: usize, m: usize, layers: usize, phi: f64, theta: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("model needs at least 2 modes, got {m}")));
        }
        if layers == 0 {
            return Err(Error::InvalidArgument("model needs at least one layer".into()));
        }
        let expected = layers * phase_count(m);
        if theta.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: theta.len(),
            });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Kerr strength must be finite, got {phi}"
            )));
        }
        Ok(Self {
            n,
            m,
            layers,
            phi,
            theta,
            mask: None,
            propagation: Propagation::Auto,
        })
    }

    /// Every interferometer at its identity point.
    pub fn identity(n: usize, m: usize, layers: usize, phi: f64) -> Result<Self> {
        let theta = MeshParams::identity(m)?.phases().repeat(layers);
        Self::new(n, m, layers, phi, theta)
    }

    /// Phases i.i.d. uniform on `(0, 2π]`.
    pub fn random(n: usize, m: usize, layers: usize, phi: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = (0..layers * phase_count(m)).map(|_| random_phase(&mut rng)).collect();
        Self::new(n, m, layers, phi, theta)
    }

    pub fn with_mask(mut self, mask: Option<Vec<LayerMask>>) -> Result<Self> {
        if let Some(mask) = &mask {
            if mask.len() != self.layers {
                return Err(Error::DimensionMismatch {
                    expected: self.layers,
                    found: mask.len(),
                });
            }
            for pair in mask.iter().flatten() {
                if pair[1] != pair[0] + 1 || pair[1] >= self.m {
                    return Err(Error::InvalidArgument(format!(
                        "mask coupling {pair:?} is not an adjacent mode pair of a {}-mode mesh",
                        self.m
                    )));
                }
            }
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn with_propagation(mut self, propagation: Propagation) -> Self {
        self.propagation = propagation;
        self
    }

    pub fn photons(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn mask(&self) -> Option<&[LayerMask]> {
        self.mask.as_deref()
    }

    pub fn propagation(&self) -> Propagation {
        self.propagation
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.theta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.theta.len(),
                found: theta.len(),
            });
        }
        self.theta.copy_from_slice(theta);
        Ok(())
    }

    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.set_theta(theta)?;
        Ok(out)
    }

    pub fn basis(&self) -> Result<Arc<FockBasis>> {
        FockBasis::shared(self.n, self.m)
    }

    pub fn params_per_layer(&self) -> usize {
        phase_count(self.m)
    }

    pub fn layer_params(&self, layer: usize) -> MeshParams {
        let k = self.params_per_layer();
        MeshParams::new(self.m, self.theta[layer * k..(layer + 1) * k].to_vec()).expect("layer slice length")
    }

    /// Which units of `layer` are enabled by the mask; `None` when unmasked.
    pub fn active_units(&self, layer: usize) -> Option<Vec<bool>> {
        let allowed = &self.mask.as_ref()?[layer];
        Some(
            reck_layout(self.m)
                .into_iter()
                .map(|upper| allowed.iter().any(|p| p[0] == upper))
                .collect(),
        )
    }

    /// Indices into `theta` that influence the forward map.
    pub fn trainable_indices(&self) -> Vec<usize> {
        let k = self.params_per_layer();
        (0..self.layers)
            .flat_map(|layer| {
                let active = self.active_units(layer);
                (0..k).filter_map(move |p| match &active {
                    Some(a) if !a[p / 2] => None,
                    _ => Some(layer * k + p),
                })
            })
            .collect()
    }

    /// Sets disabled units to their identity point (cosmetic; they are skipped anyway).
    pub fn normalize_masked(&mut self) {
        let k = self.params_per_layer();
        for layer in 0..self.layers {
            if let Some(active) = self.active_units(layer) {
                for (u, on) in active.iter().enumerate() {
                    if !on {
                        self.theta[layer * k + 2 * u] = IDENTITY_PHASES.0;
                        self.theta[layer * k + 2 * u + 1] = IDENTITY_PHASES.1;
                    }
                }
            }
        }
    }

    /// Builds every layer's propagator once; reuse the result across inputs.
    pub fn compile(&self) -> Result<CompiledQonn> {
        let basis = self.basis()?;
        let dense = match self.propagation {
            Propagation::Dense => true,
            Propagation::Unitwise => false,
            Propagation::Auto => basis.len() <= AUTO_DENSE_MAX_DIM,
        };
        let layers = (0..self.layers)
            .map(|l| {
                let params = self.layer_params(l);
                let active = self.active_units(l);
                if dense {
                    MeshPropagator::dense(&params, active.as_deref(), &basis)
                } else {
                    MeshPropagator::unitwise(&params, active.as_deref(), &basis)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let kerr = KerrLayer { phi: self.phi }.phases(&basis);
        Ok(CompiledQonn { basis, layers, kerr })
    }
}

/// A model with every layer's linear map precomputed.
#[derive(Debug, Clone)]
pub struct CompiledQonn {
    basis: Arc<FockBasis>,
    layers: Vec<MeshPropagator>,
    kerr: Vec<Complex64>,
}

impl CompiledQonn {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn forward_amplitudes(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut v = amps.to_vec();
        for layer in &self.layers {
            v = layer.apply_amplitudes(&v);
            v.iter_mut().zip(&self.kerr).for_each(|(a, p)| *a *= p);
        }
        v
    }

    pub fn forward(&self, state: &QuantumState) -> Result<QuantumState> {
        self.basis.check_same(state.basis())?;
        Ok(QuantumState::from_raw(
            Arc::clone(&self.basis),
            self.forward_amplitudes(state.amplitudes()),
        ))
    }

    /// `|⟨target|S|input⟩|²` for every pair, in training-set order.
    pub fn pair_fidelities(&self, set: &TrainingSet) -> Result<Vec<f64>> {
        self.basis.check_same(set.basis())?;
        Ok(set
            .pairs()
            .par_iter()
            .map(|(input, target)| {
                let out = self.forward_amplitudes(input.amplitudes());
                inner(target.amplitudes(), &out).norm_sqr()
            })
            .collect())
    }

    pub fn cost(&self, set: &TrainingSet) -> Result<f64> {
        let f = self.pair_fidelities(set)?;
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        Ok((1.0 - mean).clamp(0.0, 1.0))
    }
}

pub fn forward(model: &QonnModel, state: &QuantumState) -> Result<QuantumState> {
    model.compile()?.forward(state)
}

/// `1 − (1/K) Σᵢ |⟨ψᵢ_out|S(Θ)|ψᵢ_in⟩|²`.
pub fn cost(model: &QonnModel, set: &TrainingSet) -> Result<f64> {
    model.compile()?.cost(set)
}

/// Same quantity as [`cost`], evaluated on held-out pairs.
pub fn mean_test_error(model: &QonnModel, test: &TrainingSet) -> Result<f64> {
    cost(model, test)
}

/// Probability that every listed dual-rail qubit holds one photon in its
/// top mode (logical `|0⟩`), jointly, marginalized over the other modes.
pub fn reference_qubit_fidelity(state: &QuantumState, qubits: &[usize]) -> Result<f64> {
    let basis = state.basis();
    let m = basis.modes();
    if m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "dual-rail readout needs an even mode count, got {m}"
        )));
    }
    if let Some(&bad) = qubits.iter().find(|&&q| q >= m / 2) {
        return Err(Error::InvalidArgument(format!(
            "qubit index {bad} out of range for {} dual-rail qubits",
            m / 2
        )));
    }
    let mask = reference_mask(basis, qubits);
    Ok(reference_probability(state.amplitudes(), &mask))
}

/// Basis indices where every listed qubit reads logical `|0⟩`.
pub(crate) fn reference_mask(basis: &FockBasis, qubits: &[usize]) -> Vec<bool> {
    basis
        .states()
        .iter()
        .map(|s| qubits.iter().all(|&q| s[2 * q] == 1 && s[2 * q + 1] == 0))
        .collect()
}

pub(crate) fn reference_probability(amps: &[Complex64], mask: &[bool]) -> f64 {
    amps.iter()
        .zip(mask)
        .filter(|(_, &keep)| keep)
        .map(|(a, _)| a.norm_sqr())
        .sum::<f64>()
        .min(1.0)
}

/// Provenance header attached to generated training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub hamiltonian: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
}

/// `K ≥ 1` input/target pairs on one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    basis: Arc<FockBasis>,
    pairs: Vec<(QuantumState, QuantumState)>,
    provenance: Option<Provenance>,
}

impl TrainingSet {
    pub fn new(pairs: Vec<(QuantumState, QuantumState)>) -> Result<Self> {
        let Some((first, _)) = pairs.first() else {
            return Err(Error::InvalidArgument(
                "training set must contain at least one pair".into(),
            ));
        };
        let basis = Arc::clone(first.basis());
        for (a, b) in &pairs {
            basis.check_same(a.basis())?;
            basis.check_same(b.basis())?;
        }
        Ok(Self {
            basis,
            pairs,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn pairs(&self) -> &[(QuantumState, QuantumState)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn inputs(&self) -> impl Iterator<Item = &QuantumState> {
        self.pairs.iter().map(|(i, _)| i)
    }

    pub fn targets(&self) -> impl Iterator<Item = &QuantumState> {
        self.pairs.iter().map(|(_, o)| o)
    }
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    input: QuantumState,
    output: QuantumState,
}

#[derive(Serialize, Deserialize)]
struct TrainingSetRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    pairs: Vec<PairRecord>,
}

impl Serialize for TrainingSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrainingSetRecord {
            provenance: self.provenance.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|(i, o)| PairRecord {
                    input: i.clone(),
                    output: o.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrainingSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = TrainingSetRecord::deserialize(d)?;
        let set = TrainingSet::new(rec.pairs.into_iter().map(|p| (p.input, p.output)).collect())
            .map_err(serde::de::Error::custom)?;
        Ok(match rec.provenance {
            Some(p) => set.with_provenance(p),
            None => set,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::encode_dual_rail;
    use crate::interferometer::{lift_to_fock, mesh_to_unitary};
    use crate::matrix::ComplexMatrix;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis_state(n: usize, m: usize, occ: &[usize]) -> QuantumState {
        QuantumState::from_occupation(FockBasis::shared(n, m).unwrap(), occ).unwrap()
    }

    fn logical(q: usize, bits: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0); 1 << q];
        v[bits] = c(1.0);
        v
    }

    #[test]
    fn kerr_examples() {
        let s = basis_state(2, 2, &[1, 1]);
        assert_eq!(apply_kerr(&s, 1.234), s);
        let s = basis_state(2, 2, &[2, 0]);
        let out = apply_kerr(&s, PI);
        assert!((out.amplitude_of(&[2, 0]).unwrap() - c(-1.0)).norm() < 1e-15);
        let s = basis_state(3, 2, &[3, 0]);
        let out = apply_kerr(&s, PI);
        assert!((out.amplitude_of(&[3, 0]).unwrap() - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_layer_leaves_dual_rail_input() {
        let model = QonnModel::identity(2, 4, 1, 0.7).unwrap();
        let h = FRAC_1_SQRT_2;
        let input = encode_dual_rail(&[c(h), c(0.0), c(0.0), c(h)]).unwrap();
        let out = forward(&model, &input).unwrap();
        for (a, b) in out.amplitudes().iter().zip(input.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn forward_with_zero_kerr_is_linear_optics() {
        let model = QonnModel::random(2, 4, 3, 0.0, 5).unwrap();
        let basis = model.basis().unwrap();
        let mut u = ComplexMatrix::identity(4);
        for l in 0..3 {
            u = &mesh_to_unitary(&model.layer_params(l)) * &u;
        }
        let lifted = lift_to_fock(&u, &basis).unwrap();
        let input = basis_state(2, 4, &[1, 0, 0, 1]);
        let a = forward(&model, &input).unwrap();
        let b = lifted.apply(&input).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn forward_preserves_norm() {
        let model = QonnModel::random(2, 4, 2, PI, 1).unwrap();
        let out = forward(&model, &basis_state(2, 4, &[1, 0, 1, 0])).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn forward_rejects_wrong_basis() {
        let model = QonnModel::identity(2, 4, 1, PI).unwrap();
        assert!(forward(&model, &basis_state(1, 4, &[1, 0, 0, 0])).is_err());
    }

    #[test]
    fn theta_length_is_checked() {
        assert!(QonnModel::new(2, 4, 2, PI, vec![0.0; 23]).is_err());
        assert!(QonnModel::new(2, 4, 2, PI, vec![0.0; 24]).is_ok());
    }

    #[test]
    fn cost_cases() {
        let model = QonnModel::random(2, 4, 2, PI, 3).unwrap();
        let compiled = model.compile().unwrap();
        let a = basis_state(2, 4, &[1, 0, 1, 0]);
        let b = basis_state(2, 4, &[0, 1, 1, 0]);
        let fa = compiled.forward(&a).unwrap();
        let fb = compiled.forward(&b).unwrap();
        let perfect = TrainingSet::new(vec![(a.clone(), fa.clone()), (b.clone(), fb.clone())]).unwrap();
        assert!(cost(&model, &perfect).unwrap() < 1e-12);

        // fb is orthogonal to fa since S is unitary and ⟨a|b⟩ = 0.
        let wrong = TrainingSet::new(vec![(a.clone(), fb.clone())]).unwrap();
        assert!((cost(&model, &wrong).unwrap() - 1.0).abs() < 1e-12);

        let half = TrainingSet::new(vec![(a.clone(), fa), (a, fb)]).unwrap();
        assert!((mean_test_error(&model, &half).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_training_set_rejected() {
        assert!(TrainingSet::new(vec![]).is_err());
    }

    #[test]
    fn reference_fidelity_cases() {
        let s = encode_dual_rail(&logical(4, 0b0000)).unwrap();
        assert!((reference_qubit_fidelity(&s, &[0, 1, 2]).unwrap() - 1.0).abs() < 1e-15);
        let s = encode_dual_rail(&logical(4, 0b1100)).unwrap();
        assert_eq!(reference_qubit_fidelity(&s, &[0]).unwrap(), 0.0);
        let mut v = vec![c(0.0); 16];
        v[0b0011] = c(FRAC_1_SQRT_2);
        v[0b1100] = c(FRAC_1_SQRT_2);
        let s = encode_dual_rail(&v).unwrap();
        assert!((reference_qubit_fidelity(&s, &[0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(reference_qubit_fidelity(&s, &[4]).is_err());
    }

    #[test]
    fn mask_restricts_trainable_parameters() {
        let model = QonnModel::identity(2, 4, 2, PI)
            .unwrap()
            .with_mask(Some(vec![vec![[2, 3]], vec![[0, 1], [1, 2], [2, 3]]]))
            .unwrap();
        // layer 0: only the single unit on (2,3); layer 1: all six units.
        assert_eq!(model.trainable_indices().len(), 2 + 12);
        assert!(QonnModel::identity(2, 4, 1, PI)
            .unwrap()
            .with_mask(Some(vec![vec![[0, 2]]]))
            .is_err());
    }

    #[test]
    fn dense_and_unitwise_models_agree() {
        let base = QonnModel::random(3, 5, 3, PI, 17).unwrap();
        let input = basis_state(3, 5, &[1, 0, 1, 0, 1]);
        let a = forward(&base.clone().with_propagation(Propagation::Dense), &input).unwrap();
        let b = forward(&base.with_propagation(Propagation::Unitwise), &input).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn checkpoint_json_shape() {
        let model = QonnModel::random(2, 4, 1, PI, 2).unwrap();
        let v = serde_json::to_value(&model).unwrap();
        for key in ["n", "m", "layers", "phi", "theta"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v.get("mask").is_none());
        let back: QonnModel = serde_json::from_value(v).unwrap();
        let input = basis_state(2, 4, &[1, 0, 1, 0]);
        let f = crate::fock::fidelity(&forward(&model, &input).unwrap(), &forward(&back, &input).unwrap()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn training_set_json_round_trip() {
        let a = basis_state(1, 2, &[1, 0]);
        let b = basis_state(1, 2, &[0, 1]);
        let set = TrainingSet::new(vec![(a, b)]).unwrap().with_provenance(Provenance {
            hamiltonian: "test".into(),
            parameters: serde_json::json!({"x": 1}),
            seed: 3,
        });
        let text = serde_json::to_string(&set).unwrap();
        let back: TrainingSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, set);
    }
}
