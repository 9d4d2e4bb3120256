//! Principal/auxiliary decoupling: magnitude-based partitioning, the
//! no-feedback principal iteration with one-step auxiliary mapping and
//! corrected energy, the feedback-coupled variant, and the numerical
//! stability spectrum of the update map.

use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::operators::Excitation;
use crate::oracle::finite_difference_jacobian;
use crate::pqe::{
    evaluate_targets, inf_norm, iterate, update, ConvergenceTrace, Evaluation, RecordKind, SolverConfig, TraceRecord,
};
use crate::simulator::OrderedAnsatz;
use crate::{Error, PqeSystem, Result};

/// Default central-difference step for the stability Jacobian.
pub const STABILITY_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub f_pps: f64,
    /// Factors of `Û_P`, left to right.
    pub principal: Vec<Excitation>,
    /// Factors of `Û_A`, left to right.
    pub auxiliary: Vec<Excitation>,
    /// Initial amplitudes aligned with `principal`.
    pub principal_init: Vec<f64>,
    /// Initial amplitudes aligned with `auxiliary`.
    pub auxiliary_init: Vec<f64>,
    /// Pool positions of the principal factors.
    pub principal_pool_index: Vec<usize>,
    /// Pool positions of the auxiliary factors.
    pub auxiliary_pool_index: Vec<usize>,
}

impl PartitionPlan {
    pub fn n_principal(&self) -> usize {
        self.principal.len()
    }

    pub fn n_auxiliary(&self) -> usize {
        self.auxiliary.len()
    }

    pub fn n_parameters(&self) -> usize {
        self.principal.len() + self.auxiliary.len()
    }

    pub fn principal_ansatz(&self, n_qubits: usize) -> Result<OrderedAnsatz> {
        OrderedAnsatz::new(n_qubits, &self.principal)
    }

    pub fn auxiliary_ansatz(&self, n_qubits: usize) -> Result<OrderedAnsatz> {
        OrderedAnsatz::new(n_qubits, &self.auxiliary)
    }

    /// `Û_pab = Û_P · Û_A`: auxiliary factors act on the reference first.
    pub fn bipartite_ansatz(&self, n_qubits: usize) -> Result<OrderedAnsatz> {
        Ok(self
            .principal_ansatz(n_qubits)?
            .compose(&self.auxiliary_ansatz(n_qubits)?))
    }
}

/// `N_P = max(1, round(f·N_par))`.
pub fn principal_count(f_pps: f64, n_par: usize) -> usize {
    ((f_pps * n_par as f64).round() as usize).clamp(1, n_par.max(1))
}

fn by_magnitude(init: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| init[b].abs().total_cmp(&init[a].abs()).then(a.cmp(&b))
}

/// Splits the pool by `|θ_init|` (largest `N_P` become principal, ties by pool
/// order) and orders each subset as a doubles block followed by a singles
/// block, each by non-increasing `|θ_init|`.
pub fn partition_and_order(pool: &[Excitation], init: &[f64], f_pps: f64) -> Result<PartitionPlan> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("cannot partition an empty pool".into()));
    }
    if init.len() != pool.len() {
        return Err(Error::LengthMismatch {
            expected: pool.len(),
            got: init.len(),
        });
    }
    if !(f_pps > 0.0 && f_pps <= 1.0) {
        return Err(Error::InvalidArgument(format!("f_pps must lie in (0, 1], got {f_pps}")));
    }
    let n_p = principal_count(f_pps, pool.len());
    let mut ranked: Vec<usize> = (0..pool.len()).collect();
    ranked.sort_by(by_magnitude(init));
    let (principal, auxiliary) = ranked.split_at(n_p);

    let layout = |subset: &[usize]| -> Vec<usize> {
        let mut v = subset.to_vec();
        let mag = by_magnitude(init);
        v.sort_by(|a, b| pool[*b].rank().cmp(&pool[*a].rank()).then(mag(a, b)));
        v
    };
    let p = layout(principal);
    let a = layout(auxiliary);
    Ok(PartitionPlan {
        f_pps,
        principal: p.iter().map(|&k| pool[k].clone()).collect(),
        auxiliary: a.iter().map(|&k| pool[k].clone()).collect(),
        principal_init: p.iter().map(|&k| init[k]).collect(),
        auxiliary_init: a.iter().map(|&k| init[k]).collect(),
        principal_pool_index: p,
        auxiliary_pool_index: a,
    })
}

/// Principal residues `⟨Φ_P|Û_P†ĤÛ_P|Φ_0⟩` using only the principal circuit.
pub fn nfc_residue(sys: &PqeSystem, plan: &PartitionPlan, theta_p: &[f64]) -> Result<Vec<f64>> {
    let ansatz = plan.principal_ansatz(sys.n_qubits())?;
    Ok(evaluate_targets(sys, &ansatz, theta_p, &sys.projections(&plan.principal)?)?.residues)
}

/// `θ_A = ⟨Φ_A|Û_P†ĤÛ_P|Φ_0⟩ / D_A`.
pub fn map_auxiliary(sys: &PqeSystem, plan: &PartitionPlan, theta_p: &[f64]) -> Result<Vec<f64>> {
    Mapper::new(sys, plan)?.map(theta_p)
}

/// `E_P + Σ θ_A² D_A`.
pub fn corrected_energy(sys: &PqeSystem, plan: &PartitionPlan, theta_p: &[f64], theta_a: &[f64]) -> Result<f64> {
    let e_p = crate::pqe::pqe_energy(sys, &plan.principal_ansatz(sys.n_qubits())?, theta_p)?;
    Ok(e_p + correction(&sys.denominators(&plan.auxiliary)?, theta_a)?)
}

/// `Σ θ_A² D_A`.
pub fn correction(denoms: &[f64], theta_a: &[f64]) -> Result<f64> {
    if denoms.len() != theta_a.len() {
        return Err(Error::LengthMismatch {
            expected: denoms.len(),
            got: theta_a.len(),
        });
    }
    Ok(theta_a.iter().zip(denoms).map(|(t, d)| t * t * d).sum())
}

/// Second-order expansion of the bipartite energy in the auxiliary amplitudes,
/// `E_P + Σ_α (2θ_α r_α − θ_α² D_α)` with `r_α = ⟨Φ_α|Û_P†ĤÛ_P|Φ_0⟩`: the exact
/// first-order term plus the zeroth-order curvature. Equals
/// [`corrected_energy`] when `θ_A` is the mapped value.
pub fn expansion_energy(sys: &PqeSystem, plan: &PartitionPlan, theta_p: &[f64], theta_a: &[f64]) -> Result<f64> {
    let ansatz = plan.principal_ansatz(sys.n_qubits())?;
    let ev = evaluate_targets(sys, &ansatz, theta_p, &sys.projections(&plan.auxiliary)?)?;
    let denoms = sys.denominators(&plan.auxiliary)?;
    if theta_a.len() != denoms.len() {
        return Err(Error::LengthMismatch {
            expected: denoms.len(),
            got: theta_a.len(),
        });
    }
    let delta: f64 = theta_a
        .iter()
        .zip(&ev.residues)
        .zip(&denoms)
        .map(|((t, r), d)| 2.0 * t * r - t * t * d)
        .sum();
    Ok(ev.energy + delta)
}

/// `⟨Φ_0|Û_pab†ĤÛ_pab|Φ_0⟩`.
pub fn bipartite_energy(sys: &PqeSystem, plan: &PartitionPlan, theta_p: &[f64], theta_a: &[f64]) -> Result<f64> {
    let params: Vec<f64> = theta_p.iter().chain(theta_a).copied().collect();
    crate::pqe::pqe_energy(sys, &plan.bipartite_ansatz(sys.n_qubits())?, &params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdResult {
    pub theta_p: Vec<f64>,
    pub theta_a: Vec<f64>,
    pub e_principal: f64,
    pub correction: f64,
    pub e_corrected: f64,
    pub trace: ConvergenceTrace,
    /// Number of auxiliary mapping invocations.
    pub map_calls: usize,
}

struct Mapper<'a> {
    sys: &'a PqeSystem,
    ansatz: OrderedAnsatz,
    targets: Vec<(usize, f64)>,
    denoms: Vec<f64>,
}

impl<'a> Mapper<'a> {
    fn new(sys: &'a PqeSystem, plan: &PartitionPlan) -> Result<Self> {
        Ok(Self {
            sys,
            ansatz: plan.principal_ansatz(sys.n_qubits())?,
            targets: sys.projections(&plan.auxiliary)?,
            denoms: sys.denominators(&plan.auxiliary)?,
        })
    }

    /// Principal-circuit energy and mapped auxiliaries.
    fn evaluate(&self, theta_p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let ev = evaluate_targets(self.sys, &self.ansatz, theta_p, &self.targets)?;
        Ok((
            ev.energy,
            ev.residues.iter().zip(&self.denoms).map(|(r, d)| r / d).collect(),
        ))
    }

    fn map(&self, theta_p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(theta_p)?.1)
    }
}

/// Principal-only iteration followed by one auxiliary mapping and the
/// corrected energy. When auxiliaries exist, a terminal record of kind
/// `post_optimization_mapping` carries the corrected energy.
pub fn nfc_solve(sys: &PqeSystem, plan: &PartitionPlan, init: &[f64], config: &SolverConfig) -> Result<AdResult> {
    let ansatz = plan.principal_ansatz(sys.n_qubits())?;
    let targets = sys.projections(&plan.principal)?;
    let denoms_p = sys.denominators(&plan.principal)?;
    let (theta_p, mut trace) = iterate(init, &denoms_p, config, plan.n_principal() as u64, |t| {
        evaluate_targets(sys, &ansatz, t, &targets)
    })?;
    let mapper = Mapper::new(sys, plan)?;
    let (e_principal, theta_a) = mapper.evaluate(&theta_p)?;
    let corr = correction(&mapper.denoms, &theta_a)?;
    let e_corrected = e_principal + corr;
    if plan.n_auxiliary() > 0 {
        let last = trace.last_iteration().clone();
        trace.records.push(TraceRecord {
            iteration: last.iteration + 1,
            energy: e_corrected,
            residue_inf_norm: last.residue_inf_norm,
            cumulative_residue_evals: last.cumulative_residue_evals + plan.n_auxiliary() as u64,
            kind: RecordKind::PostOptimizationMapping,
        });
    }
    Ok(AdResult {
        theta_p,
        theta_a,
        e_principal,
        correction: corr,
        e_corrected,
        trace,
        map_calls: 1,
    })
}

/// Principal residues on the full bipartite circuit with auxiliaries re-mapped
/// from the current principal amplitudes at every iteration.
pub fn feedback_adpqe_solve(
    sys: &PqeSystem,
    plan: &PartitionPlan,
    init: &[f64],
    config: &SolverConfig,
) -> Result<AdResult> {
    let n = sys.n_qubits();
    let full = plan.bipartite_ansatz(n)?;
    let mapper = Mapper::new(sys, plan)?;
    let targets = sys.projections(&plan.principal)?;
    let denoms_p = sys.denominators(&plan.principal)?;
    let mut map_calls = 0usize;
    let mut last_a = Vec::new();
    let per_call = (plan.n_principal() + plan.n_auxiliary()) as u64;
    let (theta_p, trace) = iterate(init, &denoms_p, config, per_call, |t| {
        let theta_a = if plan.n_auxiliary() > 0 {
            mapper.map(t)?
        } else {
            Vec::new()
        };
        map_calls += 1;
        let params: Vec<f64> = t.iter().chain(&theta_a).copied().collect();
        last_a = theta_a;
        evaluate_targets(sys, &full, &params, &targets)
    })?;
    let e = trace.final_energy();
    Ok(AdResult {
        theta_p,
        theta_a: last_a,
        e_principal: e,
        correction: 0.0,
        e_corrected: e,
        trace,
        map_calls,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySpectrum {
    /// Eigenvalues `(re, im)` of `∂G/∂θ`, sorted by decreasing modulus.
    pub eigenvalues: Vec<(f64, f64)>,
    pub moduli: Vec<f64>,
    pub spectral_radius: f64,
    /// Parameter position carrying the largest eigenvector weight, per eigenvalue.
    pub dominant_component: Vec<usize>,
}

/// Spectrum of the Jacobian of `G(θ) = θ + r(θ)/D` at `params`, where `r`
/// projects onto the ansatz's own excitations.
pub fn stability_spectrum(
    sys: &PqeSystem,
    ansatz: &OrderedAnsatz,
    params: &[f64],
    step: f64,
) -> Result<StabilitySpectrum> {
    let ops: Vec<Excitation> = ansatz.excitations().cloned().collect();
    let denoms = sys.denominators(&ops)?;
    let targets = sys.projections(&ops)?;
    let map = |t: &[f64]| -> Result<Vec<f64>> {
        let Evaluation { residues, .. } = evaluate_targets(sys, ansatz, t, &targets)?;
        Ok(update(t, &residues, &denoms))
    };
    spectrum_of(&finite_difference_jacobian(map, params, step)?)
}

/// Eigen-decomposition summary of a square real matrix.
pub fn spectrum_of(jac: &DMatrix<f64>) -> Result<StabilitySpectrum> {
    if jac.nrows() != jac.ncols() {
        return Err(Error::InvalidArgument("jacobian must be square".into()));
    }
    if jac.nrows() == 0 {
        return Ok(StabilitySpectrum {
            eigenvalues: Vec::new(),
            moduli: Vec::new(),
            spectral_radius: 0.0,
            dominant_component: Vec::new(),
        });
    }
    let mut eig: Vec<Complex<f64>> = jac.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let dominant = eig.iter().map(|&l| dominant_component(jac, l)).collect();
    let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    Ok(StabilitySpectrum {
        spectral_radius: inf_norm(&moduli),
        eigenvalues: eig.iter().map(|z| (z.re, z.im)).collect(),
        moduli,
        dominant_component: dominant,
    })
}

/// Inverse iteration near `lambda`; returns the index of the largest entry.
fn dominant_component(jac: &DMatrix<f64>, lambda: Complex<f64>) -> usize {
    let n = jac.nrows();
    let shift = lambda + Complex::new(1e-9 * (1.0 + lambda.norm()), 1e-9);
    let m: DMatrix<Complex<f64>> = jac.map(|x| Complex::new(x, 0.0)) - DMatrix::identity(n, n) * shift;
    let lu = m.lu();
    let mut v = DVector::from_element(n, Complex::new(1.0, 0.0));
    for _ in 0..3 {
        match lu.solve(&v) {
            Some(w) => {
                let norm = w.norm();
                if !(norm.is_finite() && norm > 0.0) {
                    break;
                }
                v = w / Complex::new(norm, 0.0);
            }
            None => break,
        }
    }
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqe::{initialize_parameters, pqe_solve};

    fn exc(o: &[usize], v: &[usize]) -> Excitation {
        Excitation::new(o.to_vec(), v.to_vec()).unwrap()
    }

    fn toy_pool() -> Vec<Excitation> {
        vec![
            exc(&[0], &[4]),
            exc(&[1], &[5]),
            exc(&[0, 1], &[4, 5]),
            exc(&[2, 3], &[6, 7]),
            exc(&[0, 3], &[4, 7]),
        ]
    }

    #[test]
    fn principal_count_rounds_and_floors() {
        assert_eq!(principal_count(0.4, 26), 10);
        assert_eq!(principal_count(0.3, 26), 8);
        assert_eq!(principal_count(0.01, 26), 1);
        assert_eq!(principal_count(1.0, 26), 26);
    }

    #[test]
    fn ordering_contract() {
        let init = [0.01, -0.2, -0.05, 0.05, 0.3];
        let plan = partition_and_order(&toy_pool(), &init, 0.6).unwrap();
        // Ranked: 4 (0.3), 1 (0.2), then ties 2 and 3 at 0.05 broken by pool order.
        assert_eq!(plan.principal_pool_index, vec![4, 2, 1]);
        assert_eq!(plan.auxiliary_pool_index, vec![3, 0]);
        assert_eq!(plan.principal_init, vec![0.3, -0.05, -0.2]);
    }

    #[test]
    fn full_fraction_keeps_everything() {
        let plan = partition_and_order(&toy_pool(), &[0.1, 0.2, 0.3, 0.4, 0.5], 1.0).unwrap();
        assert_eq!(plan.n_auxiliary(), 0);
        assert_eq!(plan.n_principal(), 5);
        assert!(partition_and_order(&[], &[], 0.5).is_err());
        assert!(partition_and_order(&toy_pool(), &[0.0; 5], 0.0).is_err());
    }

    #[test]
    fn reference_mapping_gives_mp2() {
        let sys = PqeSystem::hubbard(4, 1.0, 2.0, 4).unwrap();
        let init = initialize_parameters(&sys, &sys.pool).unwrap();
        let plan = partition_and_order(&sys.pool, &init, 0.4).unwrap();
        let theta_a = map_auxiliary(&sys, &plan, &vec![0.0; plan.n_principal()]).unwrap();
        for (e, t) in plan.auxiliary.iter().zip(&theta_a) {
            if e.rank() == 1 {
                assert!(t.abs() < 1e-12);
            } else {
                let (o, v) = (e.occ(), e.virt());
                let mp2 = sys.hamiltonian.antisym(o[0], o[1], v[0], v[1])
                    / crate::hamiltonian::mp2_denominator(e, &sys.eps).unwrap();
                assert!((t - mp2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_body_mapping_is_zero() {
        let sys = PqeSystem::hubbard(3, 1.0, 2.0, 2).unwrap().one_body_only().unwrap();
        let plan = partition_and_order(&sys.pool, &vec![0.1; sys.pool.len()], 0.5).unwrap();
        let theta_p = vec![0.05; plan.n_principal()];
        assert!(map_auxiliary(&sys, &plan, &theta_p)
            .unwrap()
            .iter()
            .all(|t| t.abs() < 1e-12));
    }

    #[test]
    fn empty_auxiliary_energy_is_principal() {
        let sys = PqeSystem::hubbard(2, 1.0, 4.0, 2).unwrap();
        let init = initialize_parameters(&sys, &sys.pool).unwrap();
        let plan = partition_and_order(&sys.pool, &init, 1.0).unwrap();
        let e = corrected_energy(&sys, &plan, &plan.principal_init, &[]).unwrap();
        let ep = crate::pqe::pqe_energy(&sys, &plan.principal_ansatz(4).unwrap(), &plan.principal_init).unwrap();
        assert_eq!(e, ep);
        assert_eq!(correction(&[], &[]).unwrap(), 0.0);
        assert_eq!(correction(&[-1.0, -2.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn reductions_at_full_fraction() {
        let sys = PqeSystem::hubbard(2, 1.0, 4.0, 2).unwrap();
        let init = initialize_parameters(&sys, &sys.pool).unwrap();
        let plan = partition_and_order(&sys.pool, &init, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let ansatz = plan.principal_ansatz(4).unwrap();
        let (_, pqe) = pqe_solve(&sys, &ansatz, &plan.principal_init, &cfg).unwrap();
        let nfc = nfc_solve(&sys, &plan, &plan.principal_init, &cfg).unwrap();
        let fb = feedback_adpqe_solve(&sys, &plan, &plan.principal_init, &cfg).unwrap();
        assert_eq!(pqe.energies(), nfc.trace.energies());
        assert_eq!(pqe.energies(), fb.trace.energies());
        assert_eq!(fb.map_calls, fb.trace.records.len());
    }

    #[test]
    fn one_body_spectrum_vanishes() {
        let sys = PqeSystem::hubbard(3, 1.0, 2.0, 2).unwrap().one_body_only().unwrap();
        let ansatz = OrderedAnsatz::new(sys.n_qubits(), &sys.pool).unwrap();
        let s = stability_spectrum(&sys, &ansatz, &vec![0.0; sys.pool.len()], STABILITY_STEP).unwrap();
        assert!(s.spectral_radius < 1e-6, "{}", s.spectral_radius);
    }

    #[test]
    fn spectrum_of_known_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.0, -0.9, 0.0, 0.9, 0.0]);
        let s = spectrum_of(&m).unwrap();
        assert!((s.spectral_radius - 0.9).abs() < 1e-12);
        assert!((s.moduli[2] - 0.5).abs() < 1e-12);
        assert_eq!(s.dominant_component[2], 0);
    }
}
