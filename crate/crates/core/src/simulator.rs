//! Exact statevector simulation of excitation exponentials and Pauli observables.
//!
//! Basis-state labels put qubit 0 in the most significant position: qubit `q`
//! is bit `n - 1 - q` of the amplitude index. A set bit means the spin orbital
//! is occupied.

use num_complex::Complex64;

use crate::operators::{kappa_to_pauli, Excitation, PauliString, PauliSum};
use crate::{Error, Result};

/// Anti-Hermitian parts above this reject an observable.
pub const HERMITIAN_TOL: f64 = 1e-12;

fn index_mask(mask: u64, n_qubits: usize) -> usize {
    if n_qubits == 0 {
        return 0;
    }
    (mask.reverse_bits() >> (64 - n_qubits)) as usize
}

/// A Pauli string compiled against the amplitude index layout:
/// `P|b⟩ = phase · (-1)^{|b & z|} |b ^ x⟩`.
#[derive(Debug, Clone, Copy)]
pub struct CompiledPauli {
    x: usize,
    z: usize,
    phase: Complex64,
}

impl CompiledPauli {
    pub fn new(p: &PauliString, n_qubits: usize) -> Self {
        let phase = match p.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        Self {
            x: index_mask(p.x_mask(), n_qubits),
            z: index_mask(p.z_mask(), n_qubits),
            phase,
        }
    }

    #[inline]
    fn sign(&self, b: usize) -> f64 {
        if (b & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `⟨ψ|P|ψ⟩` (complex in general).
    #[inline]
    fn braket(&self, amps: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            acc += amps[b ^ self.x].conj() * a * self.sign(b);
        }
        acc * self.phase
    }

    fn apply_in_place(&self, amps: &mut [Complex64]) {
        if self.x == 0 {
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= self.phase * self.sign(b);
            }
            return;
        }
        for b in 0..amps.len() {
            let bp = b ^ self.x;
            if b < bp {
                let (vb, vbp) = (amps[b], amps[bp]);
                amps[bp] = self.phase * self.sign(b) * vb;
                amps[b] = self.phase * self.sign(bp) * vbp;
            }
        }
    }

    /// Applies `cos φ + i sin φ · P`.
    fn rotate(&self, phi: f64, amps: &mut [Complex64]) {
        let (s, c) = phi.sin_cos();
        let is = Complex64::new(0.0, s) * self.phase;
        if self.x == 0 {
            for (b, a) in amps.iter_mut().enumerate() {
                *a *= c + is * self.sign(b);
            }
            return;
        }
        for b in 0..amps.len() {
            let bp = b ^ self.x;
            if b < bp {
                let (vb, vbp) = (amps[b], amps[bp]);
                amps[b] = vb * c + is * self.sign(bp) * vbp;
                amps[bp] = vbp * c + is * self.sign(b) * vb;
            }
        }
    }
}

/// Pure state on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index {index} out of range for {n_qubits} qubits");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        CompiledPauli::new(p, self.n_qubits).apply_in_place(&mut self.amps);
    }

    /// `O|ψ⟩` for an arbitrary (not necessarily unitary) Pauli sum.
    pub fn apply_sum(&self, op: &PauliSum) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (p, c) in op.terms() {
            let cp = CompiledPauli::new(p, self.n_qubits);
            for (b, a) in self.amps.iter().enumerate() {
                out[b ^ cp.x] += c * cp.phase * cp.sign(b) * a;
            }
        }
        StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        }
    }

    /// The unique basis index carrying weight, if the state is (± phase) a basis state.
    pub fn as_basis_state(&self, tol: f64) -> Option<(usize, Complex64)> {
        let mut found = None;
        for (b, a) in self.amps.iter().enumerate() {
            if a.norm() > tol {
                if found.is_some() {
                    return None;
                }
                found = Some((b, *a));
            }
        }
        found
    }
}

/// Amplitude index of the determinant with the given occupied spin orbitals.
pub fn occupation_index(occupation: &[usize], n_qubits: usize) -> Result<usize> {
    let mut idx = 0usize;
    for &p in occupation {
        if p >= n_qubits {
            return Err(Error::InvalidArgument(format!(
                "occupied orbital {p} outside {n_qubits} qubits"
            )));
        }
        idx |= 1 << (n_qubits - 1 - p);
    }
    Ok(idx)
}

/// Reference determinant `|Φ_0⟩`.
pub fn reference_state(occupation: &[usize], n_qubits: usize) -> Result<StateVector> {
    Ok(StateVector::basis(n_qubits, occupation_index(occupation, n_qubits)?))
}

/// `e^{θκ}` for one excitation, factored into its commuting Pauli rotations.
#[derive(Debug, Clone)]
pub struct Generator {
    excitation: Excitation,
    /// κ = Σ_k i·a_k·P_k.
    rotations: Vec<(CompiledPauli, f64)>,
}

impl Generator {
    pub fn new(excitation: &Excitation, n_qubits: usize) -> Self {
        let kappa = kappa_to_pauli(excitation, n_qubits);
        let rotations = kappa
            .terms()
            .map(|(p, c)| {
                debug_assert!(c.re.abs() < 1e-14);
                (CompiledPauli::new(p, n_qubits), c.im)
            })
            .collect();
        Self {
            excitation: excitation.clone(),
            rotations,
        }
    }

    pub fn excitation(&self) -> &Excitation {
        &self.excitation
    }

    /// Number of commuting Pauli rotations in the factorization.
    pub fn rotation_count(&self) -> usize {
        self.rotations.len()
    }

    pub fn apply(&self, theta: f64, state: &mut StateVector) {
        if theta == 0.0 {
            return;
        }
        for (p, a) in &self.rotations {
            p.rotate(theta * a, &mut state.amps);
        }
    }
}

pub fn apply_excitation_exponential(state: &StateVector, exc: &Excitation, theta: f64) -> StateVector {
    let mut out = state.clone();
    Generator::new(exc, state.n_qubits).apply(theta, &mut out);
    out
}

/// `|Ω_μ(angle)⟩ = e^{angle·κ_μ}|Φ_0⟩`.
pub fn omega_state(reference: &StateVector, exc: &Excitation, angle: f64) -> StateVector {
    apply_excitation_exponential(reference, exc, angle)
}

/// `|Φ_μ⟩ = κ_μ|Φ_0⟩` for a basis-state reference, returned as `(index, sign)`.
pub fn excited_determinant(reference: &StateVector, exc: &Excitation) -> Result<(usize, f64)> {
    let k = kappa_to_pauli(exc, reference.n_qubits());
    let phi = reference.apply_sum(&k);
    match phi.as_basis_state(1e-12) {
        Some((idx, amp)) if (amp.norm() - 1.0).abs() < 1e-12 && amp.im.abs() < 1e-12 => Ok((idx, amp.re.signum())),
        _ => Err(Error::InvalidArgument(format!(
            "excitation {exc} does not map the reference to a single determinant"
        ))),
    }
}

/// Ordered product of excitation exponentials, written left to right and
/// applied right to left: `Û = e^{θ_0 κ_0} e^{θ_1 κ_1} …` acts with the last
/// factor first. Parameters align with `ops` by position.
#[derive(Debug, Clone)]
pub struct OrderedAnsatz {
    n_qubits: usize,
    generators: Vec<Generator>,
}

impl OrderedAnsatz {
    pub fn new(n_qubits: usize, ops: &[Excitation]) -> Result<Self> {
        if let Some(e) = ops.iter().find(|e| e.max_index() >= n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "excitation {e} outside {n_qubits} qubits"
            )));
        }
        Ok(Self {
            n_qubits,
            generators: ops.iter().map(|e| Generator::new(e, n_qubits)).collect(),
        })
    }

    /// Concatenation `self · other` (the factors of `other` act first).
    pub fn compose(&self, other: &OrderedAnsatz) -> OrderedAnsatz {
        assert_eq!(self.n_qubits, other.n_qubits);
        OrderedAnsatz {
            n_qubits: self.n_qubits,
            generators: self.generators.iter().chain(&other.generators).cloned().collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn excitations(&self) -> impl Iterator<Item = &Excitation> {
        self.generators.iter().map(|g| &g.excitation)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: params.len(),
            });
        }
        Ok(())
    }

    /// `Û(θ)|ψ⟩` in place.
    pub fn apply(&self, params: &[f64], state: &mut StateVector) -> Result<()> {
        self.check(params)?;
        for (g, &t) in self.generators.iter().zip(params).rev() {
            g.apply(t, state);
        }
        Ok(())
    }

    /// `Û(θ)†|ψ⟩` in place.
    pub fn apply_adjoint(&self, params: &[f64], state: &mut StateVector) -> Result<()> {
        self.check(params)?;
        for (g, &t) in self.generators.iter().zip(params) {
            g.apply(-t, state);
        }
        Ok(())
    }
}

pub fn build_ansatz_state(ansatz: &OrderedAnsatz, params: &[f64], reference: &StateVector) -> Result<StateVector> {
    let mut s = reference.clone();
    ansatz.apply(params, &mut s)?;
    Ok(s)
}

/// A Hermitian Pauli sum compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<(CompiledPauli, f64)>,
    source: PauliSum,
}

impl Observable {
    pub fn new(op: &PauliSum) -> Result<Self> {
        let anti = op.anti_hermitian_norm();
        if anti > HERMITIAN_TOL {
            return Err(Error::NonHermitian(anti));
        }
        let n = op.n_qubits();
        Ok(Self {
            n_qubits: n,
            terms: op.terms().map(|(p, c)| (CompiledPauli::new(p, n), c.re)).collect(),
            source: op.clone(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn pauli_sum(&self) -> &PauliSum {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Real coefficients `h_l` in term order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(_, c)| *c).collect()
    }

    pub fn expectation(&self, state: &StateVector) -> f64 {
        self.terms.iter().map(|(p, c)| c * p.braket(&state.amps).re).sum()
    }

    /// `⟨P_l⟩` per term, in term order.
    pub fn term_expectations(&self, state: &StateVector) -> Vec<f64> {
        self.terms.iter().map(|(p, _)| p.braket(&state.amps).re).collect()
    }

    /// `H|ψ⟩`.
    pub fn apply(&self, state: &StateVector) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); state.amps.len()];
        for (p, c) in &self.terms {
            let f = p.phase * *c;
            for (b, a) in state.amps.iter().enumerate() {
                out[b ^ p.x] += f * p.sign(b) * a;
            }
        }
        StateVector {
            n_qubits: state.n_qubits,
            amps: out,
        }
    }
}

/// `⟨ψ|O|ψ⟩` for a Hermitian Pauli sum.
pub fn expectation(state: &StateVector, obs: &PauliSum) -> Result<f64> {
    Ok(Observable::new(obs)?.expectation(state))
}
