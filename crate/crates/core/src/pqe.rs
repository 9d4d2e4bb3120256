//! Conventional projective solver: MP2 initialization, residues in projection
//! and three-expectation measurement form, and the quasi-Newton iteration
//! `θ ← θ + r/D`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::operators::Excitation;
use crate::simulator::{build_ansatz_state, omega_state, OrderedAnsatz, StateVector};
use crate::{Error, PqeSystem, Result};

/// Angle of the superposition state in the measurement-mode residue.
pub const OMEGA_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {i}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResidueVector(Vec<f64>);

impl ResidueVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ResidueVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Iteration,
    /// Energy at parameters averaged over the final iterations of a noisy run.
    AveragedParameters,
    PostOptimizationMapping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    pub residue_inf_norm: f64,
    pub cumulative_residue_evals: u64,
    pub kind: RecordKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub status: TraceStatus,
}

impl ConvergenceTrace {
    pub fn converged(&self) -> bool {
        self.status == TraceStatus::Converged
    }

    /// Records of regular iterations, excluding any terminal mapping record.
    pub fn iterations(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| r.kind == RecordKind::Iteration)
    }

    pub fn last_iteration(&self) -> &TraceRecord {
        self.iterations().last().expect("trace has at least one iteration")
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().expect("trace is never empty").energy
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-5,
        }
    }
}

/// Energy and residues at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub energy: f64,
    pub residues: Vec<f64>,
}

/// `Û†ĤÛ|Φ_0⟩` together with `E = ⟨Φ_0|Û†ĤÛ|Φ_0⟩`.
fn dressed_image(sys: &PqeSystem, ansatz: &OrderedAnsatz, params: &[f64]) -> Result<(f64, StateVector)> {
    let psi = build_ansatz_state(ansatz, params, &sys.reference)?;
    let h_psi = sys.observable.apply(&psi);
    let energy = psi.inner(&h_psi).re;
    let mut eta = h_psi;
    ansatz.apply_adjoint(params, &mut eta)?;
    Ok((energy, eta))
}

/// Energy and projections `⟨Φ_μ|Û†ĤÛ|Φ_0⟩` for the given excitations.
pub fn evaluate(
    sys: &PqeSystem,
    ansatz: &OrderedAnsatz,
    params: &[f64],
    projections: &[Excitation],
) -> Result<Evaluation> {
    let targets = sys.projections(projections)?;
    evaluate_targets(sys, ansatz, params, &targets)
}

pub(crate) fn evaluate_targets(
    sys: &PqeSystem,
    ansatz: &OrderedAnsatz,
    params: &[f64],
    targets: &[(usize, f64)],
) -> Result<Evaluation> {
    let (energy, eta) = dressed_image(sys, ansatz, params)?;
    let amps = eta.amplitudes();
    let residues = targets.iter().map(|&(idx, sign)| sign * amps[idx].re).collect();
    Ok(Evaluation { energy, residues })
}

/// `r_μ = ⟨ÛΦ_μ|Ĥ|ÛΦ_0⟩` for every excitation in `projections`.
pub fn residue_projection(
    sys: &PqeSystem,
    ansatz: &OrderedAnsatz,
    params: &[f64],
    projections: &[Excitation],
) -> Result<ResidueVector> {
    Ok(ResidueVector(evaluate(sys, ansatz, params, projections)?.residues))
}

/// `r_μ = ⟨Ω_μ|H̄|Ω_μ⟩ − ½E_μ − ½E_0` with `Ω_μ = e^{κ_μ π/4}Φ_0`, each term an
/// expectation of `Ĥ` on a state dressed by `Û`.
pub fn residue_measurement_mode(
    sys: &PqeSystem,
    ansatz: &OrderedAnsatz,
    params: &[f64],
    exc: &Excitation,
) -> Result<f64> {
    let dressed = |s: &StateVector| -> Result<f64> {
        let psi = build_ansatz_state(ansatz, params, s)?;
        Ok(sys.observable.expectation(&psi))
    };
    let (idx, _) = crate::simulator::excited_determinant(&sys.reference, exc)?;
    let e0 = dressed(&sys.reference)?;
    let e_mu = dressed(&StateVector::basis(sys.n_qubits(), idx))?;
    let e_omega = dressed(&omega_state(&sys.reference, exc, OMEGA_ANGLE))?;
    Ok(e_omega - 0.5 * e_mu - 0.5 * e0)
}

/// `⟨Φ_0|Û†ĤÛ|Φ_0⟩`.
pub fn pqe_energy(sys: &PqeSystem, ansatz: &OrderedAnsatz, params: &[f64]) -> Result<f64> {
    let psi = build_ansatz_state(ansatz, params, &sys.reference)?;
    Ok(sys.observable.expectation(&psi))
}

/// Pool-aligned starting amplitudes: doubles `⟨ij||ab⟩/D`, then singles from one
/// residue evaluation at the MP2 doubles, `r_ia(θ_D, θ_S = 0)/D_ia`.
pub fn initialize_parameters(sys: &PqeSystem, pool: &[Excitation]) -> Result<ParameterVector> {
    let denoms = sys.denominators(pool)?;
    let mut theta = vec![0.0; pool.len()];
    for (k, e) in pool.iter().enumerate() {
        if e.rank() == 2 {
            let (o, v) = (e.occ(), e.virt());
            theta[k] = sys.hamiltonian.antisym(o[0], o[1], v[0], v[1]) / denoms[k];
        }
    }
    if pool.iter().any(|e| e.rank() == 1) {
        let ansatz = OrderedAnsatz::new(sys.n_qubits(), pool)?;
        let r = residue_projection(sys, &ansatz, &theta, pool)?;
        for (k, e) in pool.iter().enumerate() {
            if e.rank() == 1 {
                theta[k] = r[k] / denoms[k];
            }
        }
    }
    ParameterVector::new(theta)
}

/// One step of the quasi-Newton map, `θ + r/D`.
pub fn update(theta: &[f64], residues: &[f64], denoms: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .zip(residues)
        .zip(denoms)
        .map(|((t, r), d)| t + r / d)
        .collect()
}

/// Drives `θ ← θ + r/D` until `max|r| < tol` or the iteration cap. `eval`
/// returns the energy and residues at a point; `evals_per_call` residue
/// components are charged to the trace counter per call.
pub(crate) fn iterate<F>(
    init: &[f64],
    denoms: &[f64],
    config: &SolverConfig,
    evals_per_call: u64,
    mut eval: F,
) -> Result<(Vec<f64>, ConvergenceTrace)>
where
    F: FnMut(&[f64]) -> Result<Evaluation>,
{
    if init.len() != denoms.len() {
        return Err(Error::LengthMismatch {
            expected: denoms.len(),
            got: init.len(),
        });
    }
    let mut theta = init.to_vec();
    let mut records = Vec::new();
    let mut evals = 0u64;
    let mut status = TraceStatus::MaxIterations;
    for k in 0..=config.max_iterations {
        let ev = eval(&theta)?;
        evals += evals_per_call;
        let norm = inf_norm(&ev.residues);
        if !ev.energy.is_finite() || !norm.is_finite() {
            return Err(Error::NonFinite(format!("residue evaluation at iteration {k}")));
        }
        records.push(TraceRecord {
            iteration: k,
            energy: ev.energy,
            residue_inf_norm: norm,
            cumulative_residue_evals: evals,
            kind: RecordKind::Iteration,
        });
        log::debug!("iteration {k}: E = {:.12} |r| = {norm:.3e}", ev.energy);
        if norm < config.tolerance {
            status = TraceStatus::Converged;
            break;
        }
        if k == config.max_iterations {
            break;
        }
        theta = update(&theta, &ev.residues, denoms);
    }
    if status == TraceStatus::MaxIterations {
        log::warn!("no convergence after {} iterations", config.max_iterations);
    }
    Ok((theta, ConvergenceTrace { records, status }))
}

/// Iterates all ansatz parameters against their own projections.
pub fn pqe_solve(
    sys: &PqeSystem,
    ansatz: &OrderedAnsatz,
    init: &[f64],
    config: &SolverConfig,
) -> Result<(ParameterVector, ConvergenceTrace)> {
    let ops: Vec<Excitation> = ansatz.excitations().cloned().collect();
    let denoms = sys.denominators(&ops)?;
    let targets = sys.projections(&ops)?;
    let (theta, trace) = iterate(init, &denoms, config, ops.len() as u64, |t| {
        evaluate_targets(sys, ansatz, t, &targets)
    })?;
    Ok((ParameterVector::new(theta)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::MolecularIntegrals;
    use crate::oracle::exact_ground_energy;

    fn dimer() -> PqeSystem {
        PqeSystem::hubbard(2, 1.0, 4.0, 2).unwrap()
    }

    #[test]
    fn zero_interaction_initializes_to_zero() {
        let mut mi = MolecularIntegrals::zeros(3, 2);
        mi.set_h1(0, 0, -1.0);
        mi.set_h1(1, 1, 0.5);
        mi.set_h1(2, 2, 0.9);
        let sys = PqeSystem::from_integrals(&mi).unwrap();
        let theta = initialize_parameters(&sys, &sys.pool).unwrap();
        assert!(theta.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn brillouin_at_reference() {
        let sys = PqeSystem::hubbard(4, 1.0, 2.0, 4).unwrap();
        let ansatz = OrderedAnsatz::new(8, &sys.pool).unwrap();
        let r = residue_projection(&sys, &ansatz, &vec![0.0; sys.pool.len()], &sys.pool).unwrap();
        for (e, v) in sys.pool.iter().zip(r.iter()) {
            if e.rank() == 1 {
                assert!(v.abs() < 1e-12, "{e}: {v}");
            } else {
                let (o, w) = (e.occ(), e.virt());
                assert!((v - sys.hamiltonian.antisym(o[0], o[1], w[0], w[1])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_hamiltonian_measurement_residue_vanishes() {
        let mut mi = MolecularIntegrals::zeros(2, 2);
        mi.set_h1(0, 0, -1.0);
        mi.set_h1(1, 1, 0.3);
        mi.set_eri(0, 0, 1, 1, 0.4);
        let sys = PqeSystem::from_integrals(&mi).unwrap();
        let ansatz = OrderedAnsatz::new(4, &[]).unwrap();
        for e in &sys.pool {
            assert!(residue_measurement_mode(&sys, &ansatz, &[], e).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn measurement_mode_matches_projection() {
        let sys = PqeSystem::hubbard(3, 1.0, 2.5, 2).unwrap();
        let ansatz = OrderedAnsatz::new(sys.n_qubits(), &sys.pool).unwrap();
        let theta: Vec<f64> = (0..sys.pool.len()).map(|k| 0.1 * ((k as f64) * 1.7).sin()).collect();
        let r = residue_projection(&sys, &ansatz, &theta, &sys.pool).unwrap();
        for (k, e) in sys.pool.iter().enumerate() {
            let m = residue_measurement_mode(&sys, &ansatz, &theta, e).unwrap();
            assert!((m - r[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn dimer_converges_to_exact() {
        let sys = dimer();
        let ansatz = OrderedAnsatz::new(4, &sys.pool).unwrap();
        let init = initialize_parameters(&sys, &sys.pool).unwrap();
        let (theta, trace) = pqe_solve(&sys, &ansatz, &init, &SolverConfig::default()).unwrap();
        assert!(trace.converged());
        let exact = exact_ground_energy(&sys.h_pauli, 2).unwrap();
        assert!((trace.final_energy() - exact).abs() < 1e-6);
        assert!((pqe_energy(&sys, &ansatz, &theta).unwrap() - exact).abs() < 1e-6);
        for w in trace.records.windows(2) {
            assert_eq!(w[1].cumulative_residue_evals - w[0].cumulative_residue_evals, 3);
            assert_eq!(w[1].iteration, w[0].iteration + 1);
        }
    }

    #[test]
    fn core_only_converges_immediately() {
        let mut mi = MolecularIntegrals::zeros(2, 2);
        mi.core_energy = 0.7;
        mi.set_h1(0, 0, -1.0);
        mi.set_h1(1, 1, 1.0);
        let sys = PqeSystem::from_integrals(&mi).unwrap();
        let ansatz = OrderedAnsatz::new(4, &sys.pool).unwrap();
        let (_, trace) = pqe_solve(&sys, &ansatz, &[0.0; 3], &SolverConfig::default()).unwrap();
        assert!(trace.converged());
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].residue_inf_norm, 0.0);
    }

    #[test]
    fn nonconvergence_reported() {
        let sys = dimer();
        let ansatz = OrderedAnsatz::new(4, &sys.pool).unwrap();
        let cfg = SolverConfig {
            max_iterations: 1,
            tolerance: 1e-14,
        };
        let (_, trace) = pqe_solve(&sys, &ansatz, &[0.0; 3], &cfg).unwrap();
        assert_eq!(trace.status, TraceStatus::MaxIterations);
        assert_eq!(trace.records.len(), 2);
    }

    #[test]
    fn length_mismatch_rejected() {
        let sys = dimer();
        let ansatz = OrderedAnsatz::new(4, &sys.pool).unwrap();
        assert!(pqe_solve(&sys, &ansatz, &[0.0; 2], &SolverConfig::default()).is_err());
        assert!(ParameterVector::new(vec![f64::NAN]).is_err());
    }
}
