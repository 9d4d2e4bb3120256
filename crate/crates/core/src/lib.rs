//! Projective quantum eigensolver laboratory.
//!
//! Builds second-quantized Hamiltonians (FCIDUMP or Hubbard chains), maps them
//! to qubits with Jordan–Wigner, and runs disentangled UCCSD projective
//! solvers on an exact statevector: the conventional all-parameter iteration,
//! the no-feedback principal-subspace iteration with a one-step auxiliary
//! mapping and corrected energy, and the feedback-coupled variant. A Pauli
//! trajectory noise model with gate folding and Richardson extrapolation
//! drives the noisy protocol. Dense brute-force references live in [`oracle`].

pub mod adpqe;
pub mod error;
pub mod hamiltonian;
pub mod noise;
pub mod operators;
pub mod oracle;
pub mod pqe;
pub mod simulator;
pub mod system;

pub use error::{Error, Result};
pub use system::PqeSystem;
