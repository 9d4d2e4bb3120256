//! Depolarizing noise on excitation blocks, fault-rate bookkeeping, gate
//! folding with Richardson extrapolation, and the repeated noisy protocol.

mod protocol;
mod trajectory;
mod zne;

use serde::{Deserialize, Serialize};

use crate::operators::Excitation;
use crate::{Error, Result};

pub use protocol::{noisy_protocol_run, NoisyAggregate, NoisyRun, ProtocolConfig, SolverVariant};
pub use trajectory::{fold_and_measure, mitigated_expectation, noisy_expectation, FoldPlan, NoisyCircuit};
pub use zne::{polynomial_extrapolate, richardson_extrapolate, ZneConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    /// Depolarizing probability per single-qubit fault location.
    pub p1: f64,
    /// Depolarizing probability per two-qubit fault location.
    pub p2: f64,
    /// Measurement samples per expectation; 0 disables shot noise.
    pub shots: u64,
    /// Pauli trajectories averaged per expectation.
    pub trajectories: usize,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p1: 1e-3,
            p2: 1e-2,
            shots: 5000,
            trajectories: 32,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            shots: 0,
            trajectories: 1,
        }
    }

    /// Both depolarizing probabilities multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            p1: self.p1 * factor,
            p2: self.p2 * factor,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidArgument("at least one trajectory is required".into()));
        }
        Ok(())
    }
}

/// Per-excitation gate costs of the compiled circuit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodingConstants {
    pub cnot_single: u64,
    pub cnot_double: u64,
    pub one_qubit_single: u64,
    pub one_qubit_double: u64,
}

impl Default for EncodingConstants {
    fn default() -> Self {
        Self {
            cnot_single: 2,
            cnot_double: 13,
            one_qubit_single: 3,
            one_qubit_double: 10,
        }
    }
}

impl EncodingConstants {
    /// `(cnots, one-qubit gates)` for one excitation exponential.
    pub fn block(&self, exc: &Excitation) -> (u64, u64) {
        match exc.rank() {
            1 => (self.cnot_single, self.one_qubit_single),
            _ => (self.cnot_double, self.one_qubit_double),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub n_singles: u64,
    pub n_doubles: u64,
    pub n_cnot: u64,
    pub n_single_qubit: u64,
}

impl GateCounts {
    pub fn locations(&self) -> u64 {
        self.n_cnot + self.n_single_qubit
    }
}

pub fn count_gates<'a>(ops: impl IntoIterator<Item = &'a Excitation>, enc: &EncodingConstants) -> GateCounts {
    let mut c = GateCounts::default();
    for e in ops {
        let (cx, sq) = enc.block(e);
        if e.rank() == 1 {
            c.n_singles += 1;
        } else {
            c.n_doubles += 1;
        }
        c.n_cnot += cx;
        c.n_single_qubit += sq;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultReport {
    /// `λ = Σ_l p_l`.
    pub fault_rate: f64,
    /// `Π_l (1 − p_l)`.
    pub fault_free_prob: f64,
    /// `e^{−λ}`.
    pub fault_free_exp: f64,
}

pub fn fault_report(counts: &GateCounts, nm: &NoiseModel) -> FaultReport {
    let lambda = counts.n_cnot as f64 * nm.p2 + counts.n_single_qubit as f64 * nm.p1;
    let product = (1.0 - nm.p2).powf(counts.n_cnot as f64) * (1.0 - nm.p1).powf(counts.n_single_qubit as f64);
    FaultReport {
        fault_rate: lambda,
        fault_free_prob: product,
        fault_free_exp: (-lambda).exp(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBudget {
    /// `3 N_par (Σ|h_l|)² / ε²`.
    pub full: f64,
    /// The same bound with `f_pps · N_par` residues.
    pub principal: f64,
    pub ratio: f64,
}

pub fn measurement_budget(n_par: usize, one_norm: f64, epsilon: f64, f_pps: f64) -> Result<MeasurementBudget> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let per_residue = 3.0 * one_norm * one_norm / (epsilon * epsilon);
    let full = n_par as f64 * per_residue;
    let principal = f_pps * n_par as f64 * per_residue;
    Ok(MeasurementBudget {
        full,
        principal,
        ratio: principal / full,
    })
}
