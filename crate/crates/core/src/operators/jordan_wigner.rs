use num_complex::Complex64;

use super::excitation::Excitation;
use super::pauli::{Pauli, PauliString, PauliSum};
use crate::hamiltonian::SpinOrbitalHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

impl Ladder {
    pub fn index(&self) -> usize {
        match *self {
            Ladder::Create(p) | Ladder::Annihilate(p) => p,
        }
    }

    pub fn adjoint(&self) -> Self {
        match *self {
            Ladder::Create(p) => Ladder::Annihilate(p),
            Ladder::Annihilate(p) => Ladder::Create(p),
        }
    }
}

/// A coefficient times a product of ladder operators, leftmost acting last.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coeff: Complex64,
    pub ops: Vec<Ladder>,
}

impl FermionTerm {
    pub fn new(coeff: f64, ops: Vec<Ladder>) -> Self {
        Self {
            coeff: Complex64::new(coeff, 0.0),
            ops,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coeff: self.coeff.conj(),
            ops: self.ops.iter().rev().map(Ladder::adjoint).collect(),
        }
    }
}

/// `a†_p ↦ Z_{<p} (X_p − iY_p)/2`, `a_p ↦ Z_{<p} (X_p + iY_p)/2`, so `|1⟩`
/// on qubit `p` means spin orbital `p` is occupied.
pub fn ladder_to_pauli(op: Ladder, n_qubits: usize) -> PauliSum {
    let p = op.index();
    assert!(p < n_qubits, "spin orbital {p} outside {n_qubits} qubits");
    let parity = (0..p).fold(PauliString::IDENTITY, |acc, q| {
        acc.multiply(&PauliString::single(q, Pauli::Z)).1
    });
    let xs = parity.multiply(&PauliString::single(p, Pauli::X)).1;
    let ys = parity.multiply(&PauliString::single(p, Pauli::Y)).1;
    let sign = match op {
        Ladder::Create(_) => -0.5,
        Ladder::Annihilate(_) => 0.5,
    };
    let mut s = PauliSum::zero(n_qubits);
    s.add_term(xs, Complex64::new(0.5, 0.0));
    s.add_term(ys, Complex64::new(0.0, sign));
    s
}

pub fn jordan_wigner(term: &FermionTerm, n_qubits: usize) -> PauliSum {
    let mut acc = PauliSum::from_term(n_qubits, PauliString::IDENTITY, term.coeff);
    for &op in &term.ops {
        acc = &acc * &ladder_to_pauli(op, n_qubits);
    }
    acc.simplify()
}

/// Ladder string of `τ_μ = a†_a a†_b … a_j a_i`.
pub fn excitation_ladders(exc: &Excitation) -> Vec<Ladder> {
    exc.virt()
        .iter()
        .map(|&a| Ladder::Create(a))
        .chain(exc.occ().iter().rev().map(|&i| Ladder::Annihilate(i)))
        .collect()
}

/// `κ_μ = τ_μ − τ_μ†` as a Pauli sum with purely imaginary coefficients.
pub fn kappa_to_pauli(exc: &Excitation, n_qubits: usize) -> PauliSum {
    let tau = FermionTerm::new(1.0, excitation_ladders(exc));
    let t = jordan_wigner(&tau, n_qubits);
    let td = jordan_wigner(&tau.adjoint(), n_qubits);
    (t - td).simplify()
}

/// `E_core + Σ h_pq a†_p a_q + ¼ Σ <pq||rs> a†_p a†_q a_s a_r`.
pub fn hamiltonian_to_pauli(h: &SpinOrbitalHamiltonian) -> PauliSum {
    let n = h.n_so;
    let mut out = PauliSum::identity(n, h.core_energy);
    for p in 0..n {
        for q in 0..n {
            let v = h.h1[(p, q)];
            if v != 0.0 {
                let t = FermionTerm::new(v, vec![Ladder::Create(p), Ladder::Annihilate(q)]);
                out += &jordan_wigner(&t, n);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            for r in 0..n {
                for s in 0..n {
                    if r == s {
                        continue;
                    }
                    let v = h.antisym(p, q, r, s);
                    if v != 0.0 {
                        let t = FermionTerm::new(
                            0.25 * v,
                            vec![
                                Ladder::Create(p),
                                Ladder::Create(q),
                                Ladder::Annihilate(s),
                                Ladder::Annihilate(r),
                            ],
                        );
                        out += &jordan_wigner(&t, n);
                    }
                }
            }
        }
    }
    let out = out.simplify();
    // Real integrals give real coefficients; clear rounding residue in the imaginary parts.
    let mut real = PauliSum::zero(n);
    for (p, c) in out.terms() {
        real.add_term(*p, Complex64::new(c.re, 0.0));
    }
    real.simplify()
}

/// Total number operator `Σ_p a†_p a_p`.
pub fn number_operator(n_qubits: usize) -> PauliSum {
    let mut out = PauliSum::zero(n_qubits);
    for p in 0..n_qubits {
        out += &jordan_wigner(
            &FermionTerm::new(1.0, vec![Ladder::Create(p), Ladder::Annihilate(p)]),
            n_qubits,
        );
    }
    out.simplify()
}

/// Diagonal one-body operator `Σ_p ε_p a†_p a_p`.
pub fn diagonal_one_body(eps: &[f64]) -> PauliSum {
    let n = eps.len();
    let mut out = PauliSum::zero(n);
    for (p, &e) in eps.iter().enumerate() {
        out += &jordan_wigner(&FermionTerm::new(e, vec![Ladder::Create(p), Ladder::Annihilate(p)]), n);
    }
    out.simplify()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn creation_operator_on_qubit_zero() {
        let s = ladder_to_pauli(Ladder::Create(0), 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s.coeff(&PauliString::single(0, Pauli::X)), c(0.5, 0.0));
        assert_eq!(s.coeff(&PauliString::single(0, Pauli::Y)), c(0.0, -0.5));
    }

    #[test]
    fn number_operator_on_qubit_zero() {
        let s = jordan_wigner(
            &FermionTerm::new(1.0, vec![Ladder::Create(0), Ladder::Annihilate(0)]),
            1,
        );
        assert_eq!(s.len(), 2);
        assert_eq!(s.coeff(&PauliString::IDENTITY), c(0.5, 0.0));
        assert_eq!(s.coeff(&PauliString::single(0, Pauli::Z)), c(-0.5, 0.0));
    }

    #[test]
    fn canonical_anticommutation_four_qubits() {
        let n = 4;
        for p in 0..n {
            for q in 0..n {
                let a = ladder_to_pauli(Ladder::Annihilate(p), n);
                let b = ladder_to_pauli(Ladder::Create(q), n);
                let anti = (&(&a * &b) + &(&b * &a)).simplify();
                let expected = if p == q {
                    PauliSum::identity(n, 1.0)
                } else {
                    PauliSum::zero(n)
                };
                assert_eq!(anti, expected, "p={p} q={q}");

                let aa = ladder_to_pauli(Ladder::Annihilate(q), n);
                assert!((&(&a * &aa) + &(&aa * &a)).simplify().is_empty());
            }
        }
    }

    #[test]
    fn kappa_is_anti_hermitian_with_commuting_terms() {
        let d = Excitation::double(0, 1, 4, 5).unwrap();
        let k = kappa_to_pauli(&d, 6);
        assert_eq!(k.len(), 8);
        assert!(k.is_anti_hermitian(1e-14));
        assert!(k.terms_commute());
        for (_, v) in k.terms() {
            assert!((v.norm() - 0.125).abs() < 1e-15);
        }
        let s = Excitation::single(0, 2).unwrap();
        let ks = kappa_to_pauli(&s, 4);
        assert_eq!(ks.len(), 2);
        assert!(ks.terms_commute());
    }
}
