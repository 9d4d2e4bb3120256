//! Excitation pools, Pauli-string algebra and the Jordan–Wigner mapping.

mod excitation;
mod jordan_wigner;
mod pauli;

pub use excitation::{excitation_pool, Excitation};
pub use jordan_wigner::{
    diagonal_one_body, excitation_ladders, hamiltonian_to_pauli, jordan_wigner, kappa_to_pauli, ladder_to_pauli,
    number_operator, FermionTerm, Ladder,
};
pub use pauli::{Pauli, PauliString, PauliSum, MAX_QUBITS, SIMPLIFY_TOL};
