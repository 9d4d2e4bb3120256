//! `report`: cost, stability and exact-energy summaries rendered as CSV or JSON.

use anyhow::Result;
use serde::Serialize;

use pqelab::adpqe::{nfc_solve, stability_spectrum, StabilitySpectrum, STABILITY_STEP};
use pqelab::noise::{count_gates, fault_report, measurement_budget};
use pqelab::oracle::{determinant_fci, exact_ground_energy};
use pqelab::pqe::pqe_solve;
use pqelab::PqeSystem;

use crate::config::{ExperimentConfig, Format};
use crate::run::plan_for;

/// Largest register for which the dense sector diagonalization is used.
const SECTOR_FCI_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportKind {
    Cost,
    Stability,
    Fci,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub label: String,
    pub f_pps: f64,
    pub n_parameters: usize,
    pub n_principal: usize,
    pub cnot_full: u64,
    pub cnot_principal: u64,
    pub single_qubit_full: u64,
    pub single_qubit_principal: u64,
    pub one_norm: f64,
    pub epsilon: f64,
    pub measurements_full: f64,
    pub measurements_principal: f64,
    pub measurement_ratio: f64,
    pub fault_rate_full: f64,
    pub fault_rate_principal: f64,
    pub fault_free_full: f64,
    pub fault_free_principal: f64,
    /// `f_pps^(order+1)`: relative ZNE error bound of the principal circuit.
    pub zne_bound_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub label: String,
    /// `full` (converged PQE) or `principal` (converged principal-only solve).
    pub map: String,
    pub n_parameters: usize,
    pub spectral_radius: f64,
    pub spectrum: StabilitySpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct EigenRow<'a> {
    label: &'a str,
    map: &'a str,
    index: usize,
    re: f64,
    im: f64,
    modulus: f64,
    dominant_parameter: usize,
    spectral_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FciRow {
    pub label: String,
    pub n_qubits: usize,
    pub nelec: usize,
    pub hf_energy: f64,
    pub fci_energy: f64,
    /// `sector` (dense number-sector diagonalization) or `determinant`.
    pub method: String,
}

pub fn cost(cfg: &ExperimentConfig) -> Result<Vec<CostRow>> {
    let nm = cfg.noise.model();
    let f = cfg.solver.f_pps;
    cfg.systems()?
        .into_iter()
        .map(|(label, sys)| {
            let plan = plan_for(&sys, f)?;
            let full = count_gates(&sys.pool, &cfg.encoding);
            let principal = count_gates(&plan.principal, &cfg.encoding);
            let one_norm = sys.h_pauli.one_norm();
            let budget = measurement_budget(plan.n_parameters(), one_norm, cfg.report.epsilon, f)?;
            let fault_full = fault_report(&full, &nm);
            let fault_principal = fault_report(&principal, &nm);
            Ok(CostRow {
                label,
                f_pps: f,
                n_parameters: plan.n_parameters(),
                n_principal: plan.n_principal(),
                cnot_full: full.n_cnot,
                cnot_principal: principal.n_cnot,
                single_qubit_full: full.n_single_qubit,
                single_qubit_principal: principal.n_single_qubit,
                one_norm,
                epsilon: cfg.report.epsilon,
                measurements_full: budget.full,
                measurements_principal: budget.principal,
                measurement_ratio: budget.ratio,
                fault_rate_full: fault_full.fault_rate,
                fault_rate_principal: fault_principal.fault_rate,
                fault_free_full: fault_full.fault_free_prob,
                fault_free_principal: fault_principal.fault_free_prob,
                zne_bound_factor: f.powi(cfg.zne.order as i32 + 1),
            })
        })
        .collect()
}

pub fn stability(cfg: &ExperimentConfig) -> Result<Vec<StabilityReport>> {
    let solver = cfg.solver.solver_config();
    let f = cfg.solver.f_pps;
    let mut out = Vec::new();
    for (label, sys) in cfg.systems()? {
        let full_plan = plan_for(&sys, 1.0)?;
        let ansatz = full_plan.principal_ansatz(sys.n_qubits())?;
        let (theta, trace) = pqe_solve(&sys, &ansatz, &full_plan.principal_init, &solver)?;
        if !trace.converged() {
            log::warn!("{label}: PQE not converged; spectrum taken at the last iterate");
        }
        let spectrum = stability_spectrum(&sys, &ansatz, &theta, STABILITY_STEP)?;
        out.push(stability_entry(&label, "full", spectrum));
        if f < 1.0 {
            let plan = plan_for(&sys, f)?;
            let r = nfc_solve(&sys, &plan, &plan.principal_init, &solver)?;
            let ansatz = plan.principal_ansatz(sys.n_qubits())?;
            let spectrum = stability_spectrum(&sys, &ansatz, &r.theta_p, STABILITY_STEP)?;
            out.push(stability_entry(&label, "principal", spectrum));
        }
    }
    Ok(out)
}

fn stability_entry(label: &str, map: &str, spectrum: StabilitySpectrum) -> StabilityReport {
    StabilityReport {
        label: label.to_string(),
        map: map.to_string(),
        n_parameters: spectrum.eigenvalues.len(),
        spectral_radius: spectrum.spectral_radius,
        spectrum,
    }
}

pub fn fci(cfg: &ExperimentConfig) -> Result<Vec<FciRow>> {
    cfg.systems()?
        .into_iter()
        .map(|(label, sys)| {
            let (fci_energy, method) = fci_energy(&sys)?;
            Ok(FciRow {
                label,
                n_qubits: sys.n_qubits(),
                nelec: sys.nelec(),
                hf_energy: sys.hf_energy(),
                fci_energy,
                method: method.into(),
            })
        })
        .collect()
}

fn fci_energy(sys: &PqeSystem) -> Result<(f64, &'static str)> {
    Ok(if sys.n_qubits() <= SECTOR_FCI_MAX_QUBITS {
        (exact_ground_energy(&sys.h_pauli, sys.nelec())?, "sector")
    } else {
        (determinant_fci(&sys.hamiltonian)?, "determinant")
    })
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Computes and renders a report.
pub fn render(cfg: &ExperimentConfig, kind: ReportKind, format: Format) -> Result<String> {
    match (kind, format) {
        (ReportKind::Cost, Format::Csv) => csv_string(&cost(cfg)?),
        (ReportKind::Cost, Format::Json) => Ok(serde_json::to_string_pretty(&cost(cfg)?)?),
        (ReportKind::Fci, Format::Csv) => csv_string(&fci(cfg)?),
        (ReportKind::Fci, Format::Json) => Ok(serde_json::to_string_pretty(&fci(cfg)?)?),
        (ReportKind::Stability, Format::Json) => Ok(serde_json::to_string_pretty(&stability(cfg)?)?),
        (ReportKind::Stability, Format::Csv) => {
            let reports = stability(cfg)?;
            let rows: Vec<EigenRow<'_>> = reports
                .iter()
                .flat_map(|r| {
                    let s = &r.spectrum;
                    s.eigenvalues.iter().enumerate().map(move |(i, &(re, im))| EigenRow {
                        label: &r.label,
                        map: &r.map,
                        index: i,
                        re,
                        im,
                        modulus: s.moduli[i],
                        dominant_parameter: s.dominant_component[i],
                        spectral_radius: r.spectral_radius,
                    })
                })
                .collect();
            csv_string(&rows)
        }
    }
}
