//! A fully prepared problem: qubit Hamiltonian, reference, pool and denominators.

use std::path::Path;

use crate::hamiltonian::{
    build_hubbard_chain, compute_fock, denominators, read_fcidump, spatial_to_spin_orbital, MolecularIntegrals,
    OrbitalEnergies, SpinOrbitalHamiltonian,
};
use crate::operators::{excitation_pool, hamiltonian_to_pauli, Excitation, PauliSum};
use crate::simulator::{excited_determinant, reference_state, Observable, StateVector};
use crate::Result;

#[derive(Debug, Clone)]
pub struct PqeSystem {
    pub hamiltonian: SpinOrbitalHamiltonian,
    pub eps: OrbitalEnergies,
    pub h_pauli: PauliSum,
    pub observable: Observable,
    pub reference: StateVector,
    pub pool: Vec<Excitation>,
}

impl PqeSystem {
    pub fn new(hamiltonian: SpinOrbitalHamiltonian, eps: OrbitalEnergies) -> Result<Self> {
        let h_pauli = hamiltonian_to_pauli(&hamiltonian);
        let observable = Observable::new(&h_pauli)?;
        let reference = reference_state(&hamiltonian.occupation, hamiltonian.n_so)?;
        let pool = excitation_pool(&hamiltonian);
        Ok(Self {
            hamiltonian,
            eps,
            h_pauli,
            observable,
            reference,
            pool,
        })
    }

    pub fn from_integrals(mi: &MolecularIntegrals) -> Result<Self> {
        let h = spatial_to_spin_orbital(mi)?;
        let eps = compute_fock(&h);
        Self::new(h, eps)
    }

    pub fn from_fcidump(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_integrals(&read_fcidump(path)?)
    }

    pub fn hubbard(sites: usize, t: f64, u: f64, nelec: usize) -> Result<Self> {
        let (h, eps) = build_hubbard_chain(sites, t, u, nelec)?;
        Self::new(h, eps)
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_so
    }

    pub fn nelec(&self) -> usize {
        self.hamiltonian.nelec()
    }

    pub fn hf_energy(&self) -> f64 {
        self.hamiltonian.hf_energy()
    }

    /// Denominators `D_μ` for the given excitations.
    pub fn denominators(&self, ops: &[Excitation]) -> Result<Vec<f64>> {
        denominators(ops, &self.eps)
    }

    /// `(index, sign)` of `|Φ_μ⟩ = κ_μ|Φ_0⟩` for each excitation.
    pub fn projections(&self, ops: &[Excitation]) -> Result<Vec<(usize, f64)>> {
        ops.iter().map(|e| excited_determinant(&self.reference, e)).collect()
    }

    /// The same system with the two-body interaction removed; orbital energies
    /// are recomputed for the one-body operator.
    pub fn one_body_only(&self) -> Result<Self> {
        let h = self.hamiltonian.one_body_only();
        let eps = compute_fock(&h);
        Self::new(h, eps)
    }
}
