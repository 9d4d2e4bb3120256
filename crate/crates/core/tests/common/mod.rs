#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pqelab::hamiltonian::SpinOrbitalHamiltonian;
use pqelab::operators::{excitation_ladders, Excitation, Ladder};
use pqelab::oracle::DenseOperator;
use pqelab::PqeSystem;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn sidecar(name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(fixture(&format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn system(name: &str) -> PqeSystem {
    PqeSystem::from_fcidump(fixture(&format!("{name}.fcidump"))).unwrap()
}

pub fn dimer() -> PqeSystem {
    PqeSystem::hubbard(2, 1.0, 4.0, 2).unwrap()
}

/// Column action of a ladder matrix: `col → (row, entry)` for its single nonzero.
fn ladder_table(op: Ladder, n: usize) -> Vec<Option<(usize, f64)>> {
    let m = DenseOperator::ladder(op, n).unwrap().matrix;
    (0..m.ncols())
        .map(|c| {
            (0..m.nrows())
                .find(|&r| m[(r, c)].norm() > 0.0)
                .map(|r| (r, m[(r, c)].re))
        })
        .collect()
}

fn apply_string(tables: &[&[Option<(usize, f64)>]], col: usize) -> Option<(usize, f64)> {
    let mut state = (col, 1.0);
    for t in tables.iter().rev() {
        let (row, v) = t[state.0]?;
        state = (row, state.1 * v);
    }
    Some(state)
}

/// `H` assembled from ladder matrices and the integrals, bypassing the qubit mapping.
pub fn dense_hamiltonian(h: &SpinOrbitalHamiltonian) -> DenseOperator {
    let n = h.n_so;
    let d = 1 << n;
    let mut m = DMatrix::<Complex64>::identity(d, d) * Complex64::new(h.core_energy, 0.0);
    let create: Vec<_> = (0..n).map(|p| ladder_table(Ladder::Create(p), n)).collect();
    let annihilate: Vec<_> = (0..n).map(|p| ladder_table(Ladder::Annihilate(p), n)).collect();
    for col in 0..d {
        for (p, cp) in create.iter().enumerate() {
            for (q, aq) in annihilate.iter().enumerate() {
                let v = h.h1[(p, q)];
                if v == 0.0 {
                    continue;
                }
                if let Some((row, s)) = apply_string(&[cp, aq], col) {
                    m[(row, col)] += Complex64::new(v * s, 0.0);
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s_ in 0..n {
                        let v = h.antisym(p, q, r, s_);
                        if v == 0.0 {
                            continue;
                        }
                        let ops = [&create[p][..], &create[q][..], &annihilate[s_][..], &annihilate[r][..]];
                        if let Some((row, s)) = apply_string(&ops, col) {
                            m[(row, col)] += Complex64::new(0.25 * v * s, 0.0);
                        }
                    }
                }
            }
        }
    }
    DenseOperator { n_qubits: n, matrix: m }
}

/// `τ − τ†` from ladder matrices.
pub fn dense_kappa(exc: &Excitation, n: usize) -> DenseOperator {
    let tau = DenseOperator::ladder_product(&excitation_ladders(exc), n).unwrap();
    DenseOperator {
        n_qubits: n,
        matrix: &tau.matrix - tau.matrix.adjoint(),
    }
}

pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    DenseOperator {
        n_qubits: a.n_qubits,
        matrix: &a.matrix * &b.matrix - &b.matrix * &a.matrix,
    }
}

/// Deterministic pseudo-random angles in `[-1, 1]`.
pub fn angles(n: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
