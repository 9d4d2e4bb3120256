//! `run`: solve every configured system and write manifest, traces and noisy aggregates.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use pqelab::adpqe::{feedback_adpqe_solve, nfc_solve, partition_and_order, AdResult, PartitionPlan};
use pqelab::noise::{noisy_protocol_run, NoisyAggregate, SolverVariant};
use pqelab::pqe::{initialize_parameters, pqe_solve, ConvergenceTrace, RecordKind, TraceRecord, TraceStatus};
use pqelab::PqeSystem;

use crate::config::{ExperimentConfig, Format};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub label: String,
    pub n_qubits: usize,
    pub n_parameters: usize,
    pub n_principal: usize,
    pub hf_energy: f64,
    /// `converged`, `max_iterations` or `terminated` (noisy protocol).
    pub status: String,
    pub iterations: usize,
    pub final_energy: f64,
    /// Principal-circuit energy before the auxiliary correction.
    pub principal_energy: Option<f64>,
    pub correction: Option<f64>,
    pub final_std: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    created_unix: u64,
    config: &'a ExperimentConfig,
    seeds: Vec<u64>,
    systems: &'a [SystemSummary],
    files: Vec<String>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub systems: Vec<SystemSummary>,
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iteration: usize,
    energy: f64,
    residue_inf_norm: f64,
    cumulative_residue_evals: u64,
    kind: RecordKind,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        Self {
            iteration: r.iteration,
            energy: r.energy,
            residue_inf_norm: r.residue_inf_norm,
            cumulative_residue_evals: r.cumulative_residue_evals,
            kind: r.kind,
        }
    }
}

#[derive(Debug, Serialize)]
struct RepeatRow {
    repeat: usize,
    seed: u64,
    iteration: usize,
    energy: f64,
    residue_inf_norm: f64,
    cumulative_residue_evals: u64,
    kind: RecordKind,
}

#[derive(Debug, Serialize)]
struct MeanRow {
    iteration: usize,
    kind: RecordKind,
    mean_energy: f64,
    std_energy: f64,
}

struct Writer<'a> {
    dir: &'a Path,
    format: Format,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    /// Writes `rows` as `<stem>.csv` or, in JSON mode, `json` as `<stem>.json`.
    fn table<T: Serialize, J: Serialize + ?Sized>(&mut self, stem: &str, rows: &[T], json: &J) -> Result<()> {
        let path = match self.format {
            Format::Csv => {
                let path = self.dir.join(format!("{stem}.csv"));
                let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
                path
            }
            Format::Json => {
                let path = self.dir.join(format!("{stem}.json"));
                fs::write(&path, serde_json::to_string_pretty(json)?)?;
                path
            }
        };
        self.files.push(path);
        Ok(())
    }
}

pub fn plan_for(sys: &PqeSystem, f_pps: f64) -> Result<PartitionPlan> {
    let init = initialize_parameters(sys, &sys.pool)?;
    Ok(partition_and_order(&sys.pool, &init, f_pps)?)
}

fn status_label(s: TraceStatus) -> String {
    match s {
        TraceStatus::Converged => "converged",
        TraceStatus::MaxIterations => "max_iterations",
    }
    .to_string()
}

fn solve(
    cfg: &ExperimentConfig,
    sys: &PqeSystem,
    plan: &PartitionPlan,
) -> Result<(ConvergenceTrace, Option<AdResult>)> {
    let solver = cfg.solver.solver_config();
    Ok(match cfg.solver.kind {
        SolverVariant::Pqe => {
            let ansatz = plan.bipartite_ansatz(sys.n_qubits())?;
            let init: Vec<f64> = plan
                .principal_init
                .iter()
                .chain(&plan.auxiliary_init)
                .copied()
                .collect();
            (pqe_solve(sys, &ansatz, &init, &solver)?.1, None)
        }
        SolverVariant::NfcAdpqe => {
            let r = nfc_solve(sys, plan, &plan.principal_init, &solver)?;
            (r.trace.clone(), Some(r))
        }
        SolverVariant::FeedbackAdpqe => {
            let r = feedback_adpqe_solve(sys, plan, &plan.principal_init, &solver)?;
            (r.trace.clone(), Some(r))
        }
    })
}

fn noiseless(cfg: &ExperimentConfig, label: &str, sys: &PqeSystem, w: &mut Writer<'_>) -> Result<SystemSummary> {
    let plan = plan_for(sys, cfg.solver.effective_f_pps())?;
    let (trace, ad) = solve(cfg, sys, &plan)?;
    if !trace.converged() {
        log::warn!("{label}: not converged after {} iterations", cfg.solver.max_iterations);
    }
    let rows: Vec<TraceRow> = trace.records.iter().map(TraceRow::from).collect();
    w.table(&format!("{label}_trace"), &rows, &trace)?;
    Ok(SystemSummary {
        label: label.to_string(),
        n_qubits: sys.n_qubits(),
        n_parameters: plan.n_parameters(),
        n_principal: plan.n_principal(),
        hf_energy: sys.hf_energy(),
        status: status_label(trace.status),
        iterations: trace.iterations().count(),
        final_energy: ad.as_ref().map_or_else(|| trace.final_energy(), |r| r.e_corrected),
        principal_energy: ad.as_ref().map(|r| r.e_principal),
        correction: ad.as_ref().map(|r| r.correction),
        final_std: None,
    })
}

fn noisy(cfg: &ExperimentConfig, label: &str, sys: &PqeSystem, w: &mut Writer<'_>) -> Result<SystemSummary> {
    let plan = plan_for(sys, cfg.solver.effective_f_pps())?;
    let agg: NoisyAggregate = noisy_protocol_run(
        sys,
        &plan,
        cfg.solver.kind,
        &cfg.noise.model(),
        &cfg.encoding,
        &cfg.zne,
        &cfg.protocol,
    )?;
    let rows: Vec<RepeatRow> = agg
        .runs
        .iter()
        .enumerate()
        .flat_map(|(k, run)| {
            run.trace.records.iter().map(move |r| RepeatRow {
                repeat: k,
                seed: run.seed,
                iteration: r.iteration,
                energy: r.energy,
                residue_inf_norm: r.residue_inf_norm,
                cumulative_residue_evals: r.cumulative_residue_evals,
                kind: r.kind,
            })
        })
        .collect();
    w.table(&format!("{label}_noisy_runs"), &rows, &agg.runs)?;
    let kinds = agg.runs[0].trace.records.iter().map(|r| (r.iteration, r.kind));
    let means: Vec<MeanRow> = kinds
        .zip(agg.mean_energy.iter().zip(&agg.std_energy))
        .map(|((iteration, kind), (&mean_energy, &std_energy))| MeanRow {
            iteration,
            kind,
            mean_energy,
            std_energy,
        })
        .collect();
    w.table(&format!("{label}_noisy_mean"), &means, &means)?;
    let changes: Vec<f64> = agg.runs.iter().filter_map(|r| r.post_mapping_change).collect();
    let mean_change = (!changes.is_empty()).then(|| changes.iter().sum::<f64>() / changes.len() as f64);
    Ok(SystemSummary {
        label: label.to_string(),
        n_qubits: sys.n_qubits(),
        n_parameters: plan.n_parameters(),
        n_principal: plan.n_principal(),
        hf_energy: sys.hf_energy(),
        status: "terminated".into(),
        iterations: cfg.protocol.terminate_at,
        final_energy: agg.final_mean,
        principal_energy: mean_change.map(|c| agg.final_mean - c),
        correction: mean_change,
        final_std: Some(agg.final_std),
    })
}

/// Executes the experiment and writes all artifacts under `cfg.output.path`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let dir = cfg.output.path.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = Writer {
        dir: &dir,
        format: cfg.output.format,
        files: Vec::new(),
    };
    let mut summaries = Vec::new();
    for (label, sys) in cfg.systems()? {
        log::info!("{label}: {} qubits, {} parameters", sys.n_qubits(), sys.pool.len());
        let s = if cfg.noise.enabled {
            noisy(cfg, &label, &sys, &mut w)?
        } else {
            noiseless(cfg, &label, &sys, &mut w)?
        };
        summaries.push(s);
    }
    if summaries.len() > 1 {
        w.table("sweep", &summaries, &summaries)?;
    }
    let seeds = if cfg.noise.enabled {
        (0..cfg.protocol.repeats).map(|r| cfg.protocol.seed(r)).collect()
    } else {
        Vec::new()
    };
    let manifest_path = dir.join("manifest.json");
    let mut files: Vec<PathBuf> = w.files;
    files.push(manifest_path.clone());
    let manifest = Manifest {
        tool: "pqelab",
        version: env!("CARGO_PKG_VERSION"),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        config: cfg,
        seeds,
        systems: &summaries,
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunOutput {
        dir,
        files,
        systems: summaries,
    })
}
