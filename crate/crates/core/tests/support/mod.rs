//! Seeded invariant checks shared by the `properties` and `acceptance`
//! targets. Each check draws its inputs from the seed and returns a
//! description of the first violation.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use qonn::fock::{basis_size, decode_dual_rail, encode_dual_rail, fidelity, FockBasis, QuantumState};
use qonn::hamiltonians::{
    bose_hubbard_matrix, energy, evolve_exact, haar_random_state, ising_matrix, BoseHubbardSpec, IsingSpec,
};
use qonn::interferometer::{lift_to_fock, mesh_to_unitary, random_mesh};
use qonn::matrix::ComplexMatrix;
use qonn::model::{apply_kerr, cost, forward, QonnModel, TrainingSet};
use qonn::optimizers::{minimize_local, LocalSearchConfig};
use qonn::permanent::{permanent_naive, permanent_ryser};
use qonn::tasks::{autoencoder_cost, AutoencoderConfig, AutoencoderTask};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_state(basis: &Arc<FockBasis>, rng: &mut impl Rng) -> QuantumState {
    QuantumState::normalized(Arc::clone(basis), haar_random_state(basis.len(), rng)).unwrap()
}

fn random_model(n: usize, m: usize, layers: usize, phi: f64, rng: &mut impl Rng) -> QonnModel {
    QonnModel::random(n, m, layers, phi, rng.random()).unwrap()
}

fn vec_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Stars and bars by recursion on the first mode's occupation.
fn count_recursive(n: usize, m: usize) -> usize {
    if m == 1 {
        return 1;
    }
    (0..=n).map(|k| count_recursive(n - k, m - 1)).sum()
}

pub fn basis_sizes() -> Check {
    for n in 0..=4 {
        for m in 1..=10 {
            let b = FockBasis::shared(n, m).map_err(|e| e.to_string())?;
            let want = count_recursive(n, m);
            ensure(b.len() == want && basis_size(n, m) == want, || {
                format!("(n={n}, m={m}): {} states, expected {want}", b.len())
            })?;
        }
    }
    Ok(())
}

pub fn dual_rail_preserves_overlaps(seed: u64) -> Check {
    let mut r = rng(seed);
    let q = r.random_range(1..=3);
    let a = haar_random_state(1 << q, &mut r);
    let b = haar_random_state(1 << q, &mut r);
    let logical: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
    let f = fidelity(&encode_dual_rail(&a).unwrap(), &encode_dual_rail(&b).unwrap()).unwrap();
    ensure((f - logical.norm_sqr()).abs() < 1e-12, || {
        format!("fidelity {f} vs logical overlap {}", logical.norm_sqr())
    })
}

pub fn dual_rail_round_trip(seed: u64) -> Check {
    let mut r = rng(seed);
    let q = r.random_range(1..=3);
    let a = haar_random_state(1 << q, &mut r);
    let (back, leakage) = decode_dual_rail(&encode_dual_rail(&a).unwrap(), q).unwrap();
    let d = vec_distance(&a, &back);
    ensure(d < 1e-12 && leakage < 1e-12, || {
        format!("round trip error {d}, leakage {leakage}")
    })
}

pub fn ryser_matches_naive(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.random_range(1..=8);
    let m = random_matrix(n, &mut r);
    let a = permanent_ryser(&m).unwrap();
    let b = permanent_naive(&m).unwrap();
    let rel = (a - b).norm() / b.norm().max(1e-300);
    ensure(rel < 1e-10, || format!("{n}x{n}: ryser {a} vs naive {b} (rel {rel:e})"))
}

pub fn permanent_symmetries(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.random_range(1..=6);
    let m = random_matrix(n, &mut r);
    let p = permanent_ryser(&m).unwrap();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut r);
    cols.shuffle(&mut r);
    let permuted = ComplexMatrix::from_fn(n, n, |i, j| m.row(rows[i])[cols[j]]);
    let c = Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
    let k = r.random_range(0..n);
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| if i == k { c * m.row(i)[j] } else { m.row(i)[j] });
    let tol = 1e-10 * p.norm().max(1.0);
    let perm = permanent_ryser(&permuted).unwrap();
    let trans = permanent_ryser(&m.transpose()).unwrap();
    let sc = permanent_ryser(&scaled).unwrap();
    ensure((perm - p).norm() < tol, || {
        format!("row/column permutation changed {p} to {perm}")
    })?;
    ensure((trans - p).norm() < tol, || format!("transpose changed {p} to {trans}"))?;
    ensure((sc - c * p).norm() < tol * c.norm().max(1.0), || {
        format!("row scaling: {sc} vs {}", c * p)
    })
}

pub fn lift_is_unitary(seed: u64) -> Check {
    let mut r = rng(seed);
    let m = r.random_range(2..=6);
    let n = r.random_range(1..=3);
    lift_unitary_at(n, m, r.random())
}

pub fn lift_unitary_at(n: usize, m: usize, seed: u64) -> Check {
    let u = mesh_to_unitary(&random_mesh(m, seed).unwrap());
    let basis = FockBasis::shared(n, m).unwrap();
    let lifted = lift_to_fock(&u, &basis).unwrap();
    let d = lifted.matrix().unitarity_deviation();
    ensure(d < 1e-10, || format!("(n={n}, m={m}): ‖Φ†Φ − I‖ = {d:e}"))
}

pub fn lift_is_a_homomorphism(seed: u64) -> Check {
    let mut r = rng(seed);
    let basis = FockBasis::shared(2, 4).unwrap();
    let u = mesh_to_unitary(&random_mesh(4, r.random()).unwrap());
    let v = mesh_to_unitary(&random_mesh(4, r.random()).unwrap());
    let lhs = lift_to_fock(&u.matmul(&v).unwrap(), &basis).unwrap();
    let lu = lift_to_fock(&u, &basis).unwrap();
    let lv = lift_to_fock(&v, &basis).unwrap();
    let rhs = lu.matrix().matmul(lv.matrix()).unwrap();
    let d = lhs.matrix().frobenius_distance(&rhs);
    ensure(d < 1e-9, || format!("‖Φ(UV) − Φ(U)Φ(V)‖ = {d:e}"))
}

pub fn single_photon_sector_is_u(seed: u64) -> Check {
    let mut r = rng(seed);
    let m = r.random_range(2..=6);
    let u = mesh_to_unitary(&random_mesh(m, r.random()).unwrap());
    let basis = FockBasis::shared(1, m).unwrap();
    let lifted = lift_to_fock(&u, &basis).unwrap();
    // One photon: basis state k has the photon in mode k.
    for k in 0..m {
        ensure(basis.state(k)[k] == 1, || {
            format!("basis state {k} is {:?}", basis.state(k))
        })?;
    }
    let d = lifted.matrix().frobenius_distance(&u);
    ensure(d < 1e-12, || format!("single-photon block differs from U by {d:e}"))
}

pub fn forward_preserves_norm(seed: u64) -> Check {
    let mut r = rng(seed);
    let model = random_model(2, 4, 3, r.random_range(-PI..PI), &mut r);
    let basis = model.basis().unwrap();
    let out = forward(&model, &random_state(&basis, &mut r)).unwrap();
    let d = (out.norm() - 1.0).abs();
    ensure(d < 1e-10, || format!("norm drift {d:e}"))
}

pub fn cost_bounds_and_phase_invariance(seed: u64) -> Check {
    let mut r = rng(seed);
    let model = random_model(2, 4, 2, PI, &mut r);
    let basis = model.basis().unwrap();
    let pairs: Vec<_> = (0..3)
        .map(|_| (random_state(&basis, &mut r), random_state(&basis, &mut r)))
        .collect();
    let alpha = r.random_range(0.0..2.0 * PI);
    let rotated: Vec<_> = pairs
        .iter()
        .map(|(a, b)| (a.clone(), b.scaled(Complex64::from_polar(1.0, alpha))))
        .collect();
    let c = cost(&model, &TrainingSet::new(pairs).unwrap()).unwrap();
    let c2 = cost(&model, &TrainingSet::new(rotated).unwrap()).unwrap();
    ensure((0.0..=1.0).contains(&c), || format!("cost {c} outside [0, 1]"))?;
    ensure((c - c2).abs() < 1e-12, || {
        format!("global phase changed cost {c} to {c2}")
    })
}

pub fn kerr_inverse(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.random_range(1..=3);
    let m = r.random_range(2..=5);
    let basis = FockBasis::shared(n, m).unwrap();
    let psi = random_state(&basis, &mut r);
    let phi = r.random_range(-10.0..10.0);
    let back = apply_kerr(&apply_kerr(&psi, phi), -phi);
    let d = vec_distance(back.amplitudes(), psi.amplitudes());
    ensure(d < 1e-12, || format!("K(−φ)K(φ)ψ differs from ψ by {d:e}"))
}

pub fn linear_layers_compose(seed: u64) -> Check {
    let mut r = rng(seed);
    let layers = r.random_range(1..=4);
    let model = random_model(2, 4, layers, 0.0, &mut r);
    let basis = model.basis().unwrap();
    let mut total = ComplexMatrix::identity(4);
    for l in 0..layers {
        total = mesh_to_unitary(&model.layer_params(l)).matmul(&total).unwrap();
    }
    let psi = random_state(&basis, &mut r);
    let expected = lift_to_fock(&total, &basis).unwrap().apply(&psi).unwrap();
    let got = forward(&model, &psi).unwrap();
    let d = vec_distance(got.amplitudes(), expected.amplitudes());
    ensure(d < 1e-9, || {
        format!("{layers} linear layers differ from the lifted product by {d:e}")
    })
}

fn random_hamiltonian(r: &mut impl Rng) -> (ComplexMatrix, usize) {
    if r.random_bool(0.5) {
        let spec = IsingSpec::chain(2, r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), 1.0);
        let h = ising_matrix(&spec).unwrap();
        let dim = h.rows();
        (h, dim)
    } else {
        let spec = BoseHubbardSpec {
            n_photons: 2,
            m_sites: 4,
            omega: r.random_range(-1.0..1.0),
            t_hop: r.random_range(0.0..2.0),
            u: r.random_range(0.0..20.0),
            edges: BoseHubbardSpec::plaquette_edges(),
            t: 1.0,
        };
        let basis = FockBasis::shared(2, 4).unwrap();
        (bose_hubbard_matrix(&spec, &basis).unwrap(), basis.len())
    }
}

pub fn evolution_composes(seed: u64) -> Check {
    let mut r = rng(seed);
    let (h, dim) = random_hamiltonian(&mut r);
    let psi = haar_random_state(dim, &mut r);
    let (t1, t2) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
    let two_step = evolve_exact(&h, t1, &evolve_exact(&h, t2, &psi).unwrap()).unwrap();
    let one_step = evolve_exact(&h, t1 + t2, &psi).unwrap();
    let d = vec_distance(&two_step, &one_step);
    ensure(d < 1e-10, || format!("U(t1)U(t2) vs U(t1+t2): {d:e}"))
}

pub fn energy_is_conserved(seed: u64) -> Check {
    let mut r = rng(seed);
    let (h, dim) = random_hamiltonian(&mut r);
    let psi = haar_random_state(dim, &mut r);
    let e0 = energy(&h, &psi).unwrap();
    for _ in 0..3 {
        let t = r.random_range(0.0..5.0);
        let e = energy(&h, &evolve_exact(&h, t, &psi).unwrap()).unwrap();
        ensure((e - e0).abs() < 1e-10, || format!("energy {e0} became {e} at t={t}"))?;
    }
    Ok(())
}

pub fn bose_hubbard_structure(seed: u64) -> Check {
    let mut r = rng(seed);
    let (h, _) = random_hamiltonian(&mut r);
    ensure(h.hermiticity_deviation() < 1e-12, || {
        format!("H − H† = {:e}", h.hermiticity_deviation())
    })
}

pub fn autoencoder_cost_in_unit_interval(seed: u64) -> Check {
    let mut r = rng(seed);
    let config = AutoencoderConfig::default();
    let theta = qonn::tasks::autoencoder::random_theta(&config, &mut r);
    let model = config.model(theta).unwrap();
    let c = autoencoder_cost(&model, &AutoencoderTask::h2_default().unwrap()).unwrap();
    ensure((0.0..=1.0).contains(&c), || format!("autoencoder cost {c}"))
}

pub fn local_search_never_worsens(seed: u64) -> Check {
    let mut r = rng(seed);
    let dim = r.random_range(1..=4);
    let centre: Vec<f64> = (0..dim).map(|_| r.random_range(-3.0..3.0)).collect();
    let x0: Vec<f64> = (0..dim).map(|_| r.random_range(-3.0..3.0)).collect();
    let f = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&centre)
            .map(|(a, c)| (a - c).powi(2) + (3.0 * a).sin())
            .sum()
    };
    let config = LocalSearchConfig {
        max_evaluations: r.random_range(1..300),
        ..Default::default()
    };
    let res = minimize_local(f, &x0, &config).unwrap();
    ensure(res.f <= f(&x0), || {
        format!("returned {} above f(x0) = {}", res.f, f(&x0))
    })?;
    ensure(res.f == f(&res.x), || "reported value differs from f(x*)".to_string())
}

/// Every seeded check, by name.
pub const SEEDED: &[(&str, fn(u64) -> Check)] = &[
    ("dual_rail_preserves_overlaps", dual_rail_preserves_overlaps),
    ("dual_rail_round_trip", dual_rail_round_trip),
    ("ryser_matches_naive", ryser_matches_naive),
    ("permanent_symmetries", permanent_symmetries),
    ("lift_is_unitary", lift_is_unitary),
    ("lift_is_a_homomorphism", lift_is_a_homomorphism),
    ("single_photon_sector_is_u", single_photon_sector_is_u),
    ("forward_preserves_norm", forward_preserves_norm),
    ("cost_bounds_and_phase_invariance", cost_bounds_and_phase_invariance),
    ("kerr_inverse", kerr_inverse),
    ("linear_layers_compose", linear_layers_compose),
    ("evolution_composes", evolution_composes),
    ("energy_is_conserved", energy_is_conserved),
    ("bose_hubbard_structure", bose_hubbard_structure),
    ("autoencoder_cost_in_unit_interval", autoencoder_cost_in_unit_interval),
    ("local_search_never_worsens", local_search_never_worsens),
];
