//! Fixed-length noisy iteration with every expectation mitigated, parameter
//! averaging over the tail, and aggregation over seeded repeats.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mitigated_expectation, EncodingConstants, NoiseModel, NoisyCircuit, ZneConfig};
use crate::adpqe::PartitionPlan;
use crate::operators::Excitation;
use crate::pqe::{inf_norm, update, ConvergenceTrace, RecordKind, TraceRecord, TraceStatus, OMEGA_ANGLE};
use crate::simulator::{Generator, OrderedAnsatz};
use crate::{Error, PqeSystem, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverVariant {
    /// All plan parameters iterated on `Û_P·Û_A`.
    Pqe,
    NfcAdpqe,
    FeedbackAdpqe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub terminate_at: usize,
    pub average_last: usize,
    pub repeats: usize,
    pub base_seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            terminate_at: 40,
            average_last: 10,
            repeats: 10,
            base_seed: 2024,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.terminate_at == 0 || self.average_last == 0 || self.average_last > self.terminate_at {
            return Err(Error::InvalidArgument(format!(
                "need 0 < average_last ({}) <= terminate_at ({})",
                self.average_last, self.terminate_at
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("at least one repeat is required".into()));
        }
        Ok(())
    }

    pub fn seed(&self, repeat: usize) -> u64 {
        self.base_seed.wrapping_add(repeat as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyRun {
    pub seed: u64,
    pub trace: ConvergenceTrace,
    /// Principal amplitudes averaged over the tail iterations.
    pub theta_p: Vec<f64>,
    pub theta_a: Vec<f64>,
    pub final_energy: f64,
    /// Energy change of the terminal mapping record, when one exists.
    pub post_mapping_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyAggregate {
    pub variant: SolverVariant,
    pub seeds: Vec<u64>,
    /// Per-record mean energy across repeats.
    pub mean_energy: Vec<f64>,
    /// Per-record sample standard deviation across repeats.
    pub std_energy: Vec<f64>,
    pub final_mean: f64,
    pub final_std: f64,
    pub runs: Vec<NoisyRun>,
}

struct Projection {
    index: usize,
    generator: Generator,
}

struct Measurer<'a> {
    sys: &'a PqeSystem,
    nm: &'a NoiseModel,
    zne: &'a ZneConfig,
    enc: &'a EncodingConstants,
    reference: usize,
}

impl Measurer<'_> {
    fn projections(&self, ops: &[Excitation]) -> Result<Vec<Projection>> {
        let n = self.sys.n_qubits();
        Ok(self
            .sys
            .projections(ops)?
            .into_iter()
            .zip(ops)
            .map(|((index, _), e)| Projection {
                index,
                generator: Generator::new(e, n),
            })
            .collect())
    }

    fn measure(&self, circuit: &NoisyCircuit, rng: &mut ChaCha8Rng) -> Result<f64> {
        mitigated_expectation(circuit, &self.sys.observable, self.nm, self.zne, rng)
    }

    fn energy(&self, ansatz: &OrderedAnsatz, params: &[f64], rng: &mut ChaCha8Rng) -> Result<f64> {
        self.measure(
            &NoisyCircuit::from_ansatz(ansatz, params, self.reference, self.enc)?,
            rng,
        )
    }

    /// Mitigated `E_0` and residues `⟨Ω|H̄|Ω⟩ − ½E_μ − ½E_0`.
    fn residues(
        &self,
        ansatz: &OrderedAnsatz,
        params: &[f64],
        targets: &[Projection],
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<f64>)> {
        let base = NoisyCircuit::from_ansatz(ansatz, params, self.reference, self.enc)?;
        let e0 = self.measure(&base, rng)?;
        let mut r = Vec::with_capacity(targets.len());
        for t in targets {
            let e_mu = self.measure(&NoisyCircuit::from_ansatz(ansatz, params, t.index, self.enc)?, rng)?;
            let omega = base
                .clone()
                .with_leading_block(t.generator.clone(), OMEGA_ANGLE, self.enc);
            let e_omega = self.measure(&omega, rng)?;
            r.push(e_omega - 0.5 * e_mu - 0.5 * e0);
        }
        Ok((e0, r))
    }
}

fn mean_tail(history: &[Vec<f64>], last: usize) -> Vec<f64> {
    let tail = &history[history.len() - last..];
    let n = tail[0].len();
    (0..n)
        .map(|i| tail.iter().map(|t| t[i]).sum::<f64>() / last as f64)
        .collect()
}

fn single_run(
    sys: &PqeSystem,
    plan: &PartitionPlan,
    variant: SolverVariant,
    m: &Measurer<'_>,
    protocol: &ProtocolConfig,
    seed: u64,
) -> Result<NoisyRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.n_qubits();
    let principal = plan.principal_ansatz(n)?;
    let bipartite = plan.bipartite_ansatz(n)?;
    let all_ops: Vec<Excitation> = plan.principal.iter().chain(&plan.auxiliary).cloned().collect();

    let (ansatz, ops, mut theta) = match variant {
        SolverVariant::Pqe => (
            &bipartite,
            all_ops.clone(),
            plan.principal_init
                .iter()
                .chain(&plan.auxiliary_init)
                .copied()
                .collect::<Vec<_>>(),
        ),
        SolverVariant::NfcAdpqe | SolverVariant::FeedbackAdpqe => (
            if variant == SolverVariant::NfcAdpqe {
                &principal
            } else {
                &bipartite
            },
            plan.principal.clone(),
            plan.principal_init.clone(),
        ),
    };
    let denoms = sys.denominators(&ops)?;
    let targets = m.projections(&ops)?;
    let aux_targets = m.projections(&plan.auxiliary)?;
    let aux_denoms = sys.denominators(&plan.auxiliary)?;

    let map = |theta_p: &[f64], rng: &mut ChaCha8Rng| -> Result<(f64, Vec<f64>)> {
        let (e_p, r) = m.residues(&principal, theta_p, &aux_targets, rng)?;
        Ok((e_p, r.iter().zip(&aux_denoms).map(|(r, d)| r / d).collect()))
    };

    let mut records = Vec::with_capacity(protocol.terminate_at + 2);
    let mut history = Vec::with_capacity(protocol.terminate_at);
    let mut evals = 0u64;
    for k in 0..protocol.terminate_at {
        let (energy, r) = if variant == SolverVariant::FeedbackAdpqe {
            let theta_a = if plan.n_auxiliary() > 0 {
                map(&theta, &mut rng)?.1
            } else {
                Vec::new()
            };
            evals += plan.n_auxiliary() as u64;
            let params: Vec<f64> = theta.iter().chain(&theta_a).copied().collect();
            m.residues(ansatz, &params, &targets, &mut rng)?
        } else {
            m.residues(ansatz, &theta, &targets, &mut rng)?
        };
        evals += ops.len() as u64;
        records.push(TraceRecord {
            iteration: k,
            energy,
            residue_inf_norm: inf_norm(&r),
            cumulative_residue_evals: evals,
            kind: RecordKind::Iteration,
        });
        theta = update(&theta, &r, &denoms);
        history.push(theta.clone());
    }
    let theta_bar = mean_tail(&history, protocol.average_last);
    let last_norm = records.last().map_or(0.0, |r| r.residue_inf_norm);
    let mut push = |energy: f64, evals: u64, kind: RecordKind| {
        records.push(TraceRecord {
            iteration: records.len(),
            energy,
            residue_inf_norm: last_norm,
            cumulative_residue_evals: evals,
            kind,
        })
    };

    let (final_energy, theta_a, change) = match variant {
        SolverVariant::Pqe => {
            let e = m.energy(ansatz, &theta_bar, &mut rng)?;
            push(e, evals, RecordKind::AveragedParameters);
            (e, Vec::new(), None)
        }
        SolverVariant::NfcAdpqe => {
            if plan.n_auxiliary() == 0 {
                let e = m.energy(&principal, &theta_bar, &mut rng)?;
                push(e, evals, RecordKind::AveragedParameters);
                (e, Vec::new(), None)
            } else {
                let (e_p, theta_a) = map(&theta_bar, &mut rng)?;
                push(e_p, evals, RecordKind::AveragedParameters);
                let corr = crate::adpqe::correction(&aux_denoms, &theta_a)?;
                push(
                    e_p + corr,
                    evals + plan.n_auxiliary() as u64,
                    RecordKind::PostOptimizationMapping,
                );
                (e_p + corr, theta_a, Some(corr))
            }
        }
        SolverVariant::FeedbackAdpqe => {
            let theta_a = if plan.n_auxiliary() > 0 {
                map(&theta_bar, &mut rng)?.1
            } else {
                Vec::new()
            };
            let params: Vec<f64> = theta_bar.iter().chain(&theta_a).copied().collect();
            let e = m.energy(&bipartite, &params, &mut rng)?;
            push(e, evals + plan.n_auxiliary() as u64, RecordKind::AveragedParameters);
            (e, theta_a, None)
        }
    };
    Ok(NoisyRun {
        seed,
        trace: ConvergenceTrace {
            records,
            status: TraceStatus::MaxIterations,
        },
        theta_p: theta_bar,
        theta_a,
        final_energy,
        post_mapping_change: change,
    })
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `repeats` independent seeded noisy solves and aggregates them.
pub fn noisy_protocol_run(
    sys: &PqeSystem,
    plan: &PartitionPlan,
    variant: SolverVariant,
    nm: &NoiseModel,
    enc: &EncodingConstants,
    zne: &ZneConfig,
    protocol: &ProtocolConfig,
) -> Result<NoisyAggregate> {
    nm.validate()?;
    zne.validate()?;
    protocol.validate()?;
    let reference = sys
        .reference
        .as_basis_state(0.0)
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidSystem("reference is not a basis state".into()))?;
    let m = Measurer {
        sys,
        nm,
        zne,
        enc,
        reference,
    };
    let seeds: Vec<u64> = (0..protocol.repeats).map(|r| protocol.seed(r)).collect();
    let runs: Vec<NoisyRun> = seeds
        .par_iter()
        .map(|&s| single_run(sys, plan, variant, &m, protocol, s))
        .collect::<Result<_>>()?;
    let len = runs[0].trace.records.len();
    let (mean_energy, std_energy) = (0..len)
        .map(|i| mean_std(runs.iter().map(move |r| r.trace.records[i].energy)))
        .unzip();
    let (final_mean, final_std) = mean_std(runs.iter().map(|r| r.final_energy));
    Ok(NoisyAggregate {
        variant,
        seeds,
        mean_energy,
        std_energy,
        final_mean,
        final_std,
        runs,
    })
}
