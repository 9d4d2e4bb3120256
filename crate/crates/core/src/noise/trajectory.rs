//! Monte-Carlo Pauli trajectories over excitation blocks.
//!
//! Each block carries the fault locations of its compiled circuit. A location
//! with class probability `p` applies, with probability `p`, a Pauli drawn
//! uniformly from all `4^k` strings on its `k` qubits (identity included),
//! which realizes the channel `ρ → (1 − p)ρ + p·I/2^k`. Faults are placed after
//! the block they belong to. Every location always consumes the same random
//! draws, so trajectories at different `p` share their random numbers.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{EncodingConstants, NoiseModel, ZneConfig};
use crate::operators::{Pauli, PauliString};
use crate::simulator::{Generator, Observable, OrderedAnsatz, StateVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Location {
    One(usize),
    Two(usize, usize),
}

#[derive(Debug, Clone)]
struct Block {
    generator: Generator,
    angle: f64,
    locations: Vec<Location>,
}

/// Basis-state preparation (noiseless) followed by noisy excitation blocks in
/// application order.
#[derive(Debug, Clone)]
pub struct NoisyCircuit {
    n_qubits: usize,
    initial: usize,
    blocks: Vec<Block>,
}

fn locations_for(qubits: &[usize], n_cnot: u64, n_one: u64) -> Vec<Location> {
    let mut out = Vec::with_capacity((n_cnot + n_one) as usize);
    let pairs = qubits.len().saturating_sub(1).max(1);
    for k in 0..n_cnot as usize {
        let a = k % pairs;
        out.push(if qubits.len() > 1 {
            Location::Two(qubits[a], qubits[a + 1])
        } else {
            Location::One(qubits[0])
        });
    }
    for k in 0..n_one as usize {
        out.push(Location::One(qubits[k % qubits.len()]));
    }
    out
}

impl NoisyCircuit {
    /// `Û(θ)` of the ansatz acting on basis state `initial`.
    pub fn from_ansatz(
        ansatz: &OrderedAnsatz,
        params: &[f64],
        initial: usize,
        enc: &EncodingConstants,
    ) -> Result<Self> {
        if params.len() != ansatz.len() {
            return Err(Error::LengthMismatch {
                expected: ansatz.len(),
                got: params.len(),
            });
        }
        let mut c = Self {
            n_qubits: ansatz.n_qubits(),
            initial,
            blocks: Vec::with_capacity(ansatz.len() + 1),
        };
        for (g, &t) in ansatz.generators().iter().zip(params).rev() {
            c.push_block(g.clone(), t, enc);
        }
        Ok(c)
    }

    /// Inserts a block that acts directly on the initial basis state.
    pub fn with_leading_block(mut self, generator: Generator, angle: f64, enc: &EncodingConstants) -> Self {
        let tail = std::mem::take(&mut self.blocks);
        self.push_block(generator, angle, enc);
        self.blocks.extend(tail);
        self
    }

    fn push_block(&mut self, generator: Generator, angle: f64, enc: &EncodingConstants) {
        let (cx, sq) = enc.block(generator.excitation());
        let locations = locations_for(&generator.excitation().qubits(), cx, sq);
        self.blocks.push(Block {
            generator,
            angle,
            locations,
        });
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Fault locations of the unfolded circuit.
    pub fn location_count(&self) -> usize {
        self.blocks.iter().map(|b| b.locations.len()).sum()
    }

    /// Expected number of faults `Σ p_l` for the unfolded circuit.
    pub fn fault_rate(&self, nm: &NoiseModel) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| &b.locations)
            .map(|l| match l {
                Location::One(_) => nm.p1,
                Location::Two(..) => nm.p2,
            })
            .sum()
    }

    /// States before each block and after the last, without noise.
    fn prefixes(&self) -> Vec<StateVector> {
        let mut out = Vec::with_capacity(self.blocks.len() + 1);
        let mut s = StateVector::basis(self.n_qubits, self.initial);
        out.push(s.clone());
        for b in &self.blocks {
            b.generator.apply(b.angle, &mut s);
            out.push(s.clone());
        }
        out
    }

    pub fn ideal_state(&self) -> StateVector {
        self.prefixes().pop().expect("at least the initial state")
    }
}

/// How many times each block is folded, `G → G (G†G)^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<usize>,
}

impl FoldPlan {
    /// Scale `c`: every block folded `⌊(c−1)/2⌋` times plus one extra fold on
    /// `round(frac·n)` randomly chosen blocks, where `frac` is the remainder.
    pub fn new<R: Rng + ?Sized>(n_blocks: usize, scale: f64, rng: &mut R) -> Result<Self> {
        if !scale.is_finite() || scale < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "folding scale must be >= 1, got {scale}"
            )));
        }
        let half = (scale - 1.0) / 2.0;
        let base = half.floor() as usize;
        let extra = ((half - base as f64) * n_blocks as f64).round() as usize;
        let mut folds = vec![base; n_blocks];
        if extra > 0 {
            for k in rand::seq::index::sample(rng, n_blocks, extra.min(n_blocks)) {
                folds[k] += 1;
            }
        }
        Ok(Self { folds })
    }

    /// Fault locations of the folded circuit.
    pub fn location_count(&self, circuit: &NoisyCircuit) -> usize {
        circuit
            .blocks
            .iter()
            .zip(&self.folds)
            .map(|(b, &k)| b.locations.len() * (2 * k + 1))
            .sum()
    }
}

/// One application of a block, forward (`G`) or backward (`G†`).
#[derive(Debug, Clone, Copy)]
struct Step {
    block: usize,
    forward: bool,
}

fn steps(plan: &FoldPlan) -> Vec<Step> {
    let mut out = Vec::new();
    for (b, &k) in plan.folds.iter().enumerate() {
        out.push(Step {
            block: b,
            forward: true,
        });
        for _ in 0..k {
            out.push(Step {
                block: b,
                forward: false,
            });
            out.push(Step {
                block: b,
                forward: true,
            });
        }
    }
    out
}

fn fault_pauli(loc: Location, k: u32) -> PauliString {
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    match loc {
        Location::One(q) => PauliString::single(q, LETTERS[(k % 4) as usize]),
        Location::Two(a, b) => {
            PauliString::from_letters(&[(a, LETTERS[(k / 4) as usize]), (b, LETTERS[(k % 4) as usize])])
        }
    }
}

/// Draws the faults of one trajectory as `(step, Pauli)` in step order.
fn sample_faults<R: Rng + ?Sized>(
    circuit: &NoisyCircuit,
    steps: &[Step],
    nm: &NoiseModel,
    rng: &mut R,
) -> Vec<(usize, PauliString)> {
    let mut faults = Vec::new();
    for (s, step) in steps.iter().enumerate() {
        for &loc in &circuit.blocks[step.block].locations {
            let u: f64 = rng.random();
            let (p, choices) = match loc {
                Location::One(_) => (nm.p1, 4),
                Location::Two(..) => (nm.p2, 16),
            };
            let k = rng.random_range(0..choices);
            if u < p && k != 0 {
                faults.push((s, fault_pauli(loc, k)));
            }
        }
    }
    faults
}

fn run_faulty(
    circuit: &NoisyCircuit,
    prefixes: &[StateVector],
    steps: &[Step],
    faults: &[(usize, PauliString)],
) -> StateVector {
    let first = faults[0].0;
    let start = steps[first];
    let mut state = if start.forward {
        prefixes[start.block].clone()
    } else {
        prefixes[start.block + 1].clone()
    };
    let has_fault = |s: usize| faults.binary_search_by(|f| f.0.cmp(&s)).is_ok();
    let mut next_fault = 0;
    let mut s = first;
    while s < steps.len() {
        let step = steps[s];
        if !step.forward && s > first && !has_fault(s) && !has_fault(s + 1) {
            s += 2;
            continue;
        }
        let b = &circuit.blocks[step.block];
        b.generator
            .apply(if step.forward { b.angle } else { -b.angle }, &mut state);
        while next_fault < faults.len() && faults[next_fault].0 == s {
            state.apply_pauli(&faults[next_fault].1);
            next_fault += 1;
        }
        s += 1;
    }
    state
}

/// Trajectory-averaged Pauli-term expectations of the folded circuit.
fn mixture_terms<R: Rng + ?Sized>(
    circuit: &NoisyCircuit,
    prefixes: &[StateVector],
    ideal_terms: &[f64],
    obs: &Observable,
    nm: &NoiseModel,
    plan: &FoldPlan,
    rng: &mut R,
) -> Vec<f64> {
    let steps = steps(plan);
    let mut acc = vec![0.0; ideal_terms.len()];
    for _ in 0..nm.trajectories {
        let faults = sample_faults(circuit, &steps, nm, rng);
        if faults.is_empty() {
            acc.iter_mut().zip(ideal_terms).for_each(|(a, t)| *a += t);
        } else {
            let state = run_faulty(circuit, prefixes, &steps, &faults);
            acc.iter_mut()
                .zip(obs.term_expectations(&state))
                .for_each(|(a, t)| *a += t);
        }
    }
    let n = nm.trajectories as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// `Σ h_l ⟨P_l⟩` plus Gaussian shot noise with variance `Σ h_l² (1 − ⟨P_l⟩²) / shots`.
fn estimate<R: Rng + ?Sized>(obs: &Observable, terms: &[f64], shots: u64, rng: &mut R) -> f64 {
    let coeffs = obs.coefficients();
    let mean: f64 = coeffs.iter().zip(terms).map(|(h, t)| h * t).sum();
    if shots == 0 {
        return mean;
    }
    let var: f64 = coeffs
        .iter()
        .zip(terms)
        .map(|(h, t)| h * h * (1.0 - t * t).max(0.0))
        .sum::<f64>()
        / shots as f64;
    if var <= 0.0 {
        return mean;
    }
    mean + Normal::new(0.0, var.sqrt()).expect("finite variance").sample(rng)
}

struct Prepared {
    prefixes: Vec<StateVector>,
    ideal_terms: Vec<f64>,
}

fn prepare(circuit: &NoisyCircuit, obs: &Observable) -> Result<Prepared> {
    if obs.n_qubits() != circuit.n_qubits {
        return Err(Error::InvalidArgument(format!(
            "observable on {} qubits, circuit on {}",
            obs.n_qubits(),
            circuit.n_qubits
        )));
    }
    let prefixes = circuit.prefixes();
    let ideal_terms = obs.term_expectations(prefixes.last().expect("nonempty"));
    Ok(Prepared { prefixes, ideal_terms })
}

fn measure_prepared<R: Rng + ?Sized>(
    circuit: &NoisyCircuit,
    prep: &Prepared,
    obs: &Observable,
    nm: &NoiseModel,
    scale: f64,
    rng: &mut R,
) -> Result<f64> {
    let plan = FoldPlan::new(circuit.n_blocks(), scale, rng)?;
    let terms = mixture_terms(circuit, &prep.prefixes, &prep.ideal_terms, obs, nm, &plan, rng);
    Ok(estimate(obs, &terms, nm.shots, rng))
}

/// Noisy estimate of `⟨obs⟩` on the unfolded circuit.
pub fn noisy_expectation<R: Rng + ?Sized>(
    circuit: &NoisyCircuit,
    obs: &Observable,
    nm: &NoiseModel,
    rng: &mut R,
) -> Result<f64> {
    fold_and_measure(circuit, obs, nm, 1.0, rng)
}

/// Noisy estimate of `⟨obs⟩` on the circuit folded to scale `c`.
pub fn fold_and_measure<R: Rng + ?Sized>(
    circuit: &NoisyCircuit,
    obs: &Observable,
    nm: &NoiseModel,
    scale: f64,
    rng: &mut R,
) -> Result<f64> {
    nm.validate()?;
    let prep = prepare(circuit, obs)?;
    measure_prepared(circuit, &prep, obs, nm, scale, rng)
}

/// Zero-noise estimate from folded measurements at each configured scale.
pub fn mitigated_expectation<R: Rng + ?Sized>(
    circuit: &NoisyCircuit,
    obs: &Observable,
    nm: &NoiseModel,
    zne: &ZneConfig,
    rng: &mut R,
) -> Result<f64> {
    nm.validate()?;
    zne.validate()?;
    let prep = prepare(circuit, obs)?;
    let mut points = Vec::with_capacity(zne.scale_factors.len());
    for &c in &zne.scale_factors {
        points.push((c, measure_prepared(circuit, &prep, obs, nm, c, rng)?));
    }
    super::polynomial_extrapolate(&points, zne.order)
}
