//! Brute-force references built without the statevector kernels: dense Pauli
//! matrices from per-qubit tensor products, determinant-basis CI from the
//! integrals, dense matrix exponentials and central-difference Jacobians.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::hamiltonian::SpinOrbitalHamiltonian;
use crate::operators::{Ladder, Pauli, PauliString, PauliSum};
use crate::simulator::StateVector;
use crate::{Error, Result};

/// Largest register for which a full dense operator is built.
pub const DENSE_LIMIT: usize = 12;
/// Largest register for the dense exponential.
pub const EXPONENTIAL_LIMIT: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::DimensionTooLarge { qubits: n, limit });
    }
    Ok(())
}

/// Bit of basis index `b` holding qubit `q` (qubit 0 is most significant).
fn bit(b: usize, q: usize, n: usize) -> usize {
    (b >> (n - 1 - q)) & 1
}

/// Entry `(row, col)` of a single-qubit Pauli matrix.
fn pauli_entry(p: Pauli, row: usize, col: usize) -> Complex64 {
    match (p, row, col) {
        (Pauli::I, r, c) | (Pauli::Z, r, c) if r != c => ZERO,
        (Pauli::I, _, _) => ONE,
        (Pauli::Z, 0, _) => ONE,
        (Pauli::Z, _, _) => -ONE,
        (Pauli::X, r, c) if r == c => ZERO,
        (Pauli::X, _, _) => ONE,
        (Pauli::Y, r, c) if r == c => ZERO,
        (Pauli::Y, 0, _) => Complex64::new(0.0, -1.0),
        (Pauli::Y, _, _) => Complex64::new(0.0, 1.0),
    }
}

/// `⟨row|P|col⟩` as the product of per-qubit matrix entries.
fn pauli_element(p: &PauliString, row: usize, col: usize, n: usize) -> Complex64 {
    (0..n).fold(ONE, |acc, q| {
        acc * pauli_entry(p.get(q), bit(row, q, n), bit(col, q, n))
    })
}

/// Column image of a basis state under a Pauli string: the only nonzero row.
fn pauli_row(p: &PauliString, col: usize, n: usize) -> usize {
    (0..n).fold(col, |acc, q| match p.get(q) {
        Pauli::X | Pauli::Y => acc ^ (1 << (n - 1 - q)),
        _ => acc,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub n_qubits: usize,
    pub matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn identity(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn from_pauli_sum(op: &PauliSum) -> Result<Self> {
        let n = op.n_qubits();
        check_size(n, DENSE_LIMIT)?;
        let d = 1 << n;
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (p, c) in op.terms() {
            for col in 0..d {
                let row = pauli_row(p, col, n);
                m[(row, col)] += c * pauli_element(p, row, col, n);
            }
        }
        Ok(Self { n_qubits: n, matrix: m })
    }

    /// Fermionic ladder operator built from occupation bits and the parity of
    /// lower-indexed occupied orbitals.
    pub fn ladder(op: Ladder, n_qubits: usize) -> Result<Self> {
        check_size(n_qubits, DENSE_LIMIT)?;
        let d = 1 << n_qubits;
        let p = op.index();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for col in 0..d {
            let occupied = bit(col, p, n_qubits) == 1;
            let allowed = matches!(
                (op, occupied),
                (Ladder::Create(_), false) | (Ladder::Annihilate(_), true)
            );
            if !allowed {
                continue;
            }
            let parity = (0..p).filter(|&q| bit(col, q, n_qubits) == 1).count();
            let sign = if parity % 2 == 0 { ONE } else { -ONE };
            m[(col ^ (1 << (n_qubits - 1 - p)), col)] = sign;
        }
        Ok(Self { n_qubits, matrix: m })
    }

    /// Ordered product of ladder operators, leftmost acting last.
    pub fn ladder_product(ops: &[Ladder], n_qubits: usize) -> Result<Self> {
        let mut acc = Self::identity(n_qubits);
        for &op in ops {
            acc.matrix = &acc.matrix * Self::ladder(op, n_qubits)?.matrix;
        }
        Ok(acc)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        let v = DVector::from_column_slice(state.amplitudes());
        let out = &self.matrix * v;
        StateVector::from_amplitudes(self.n_qubits, out.as_slice().to_vec()).expect("dimension preserved")
    }

    /// `⟨a|M|b⟩`.
    pub fn element(&self, a: &StateVector, b: &StateVector) -> Complex64 {
        let va = DVector::from_column_slice(a.amplitudes());
        let vb = DVector::from_column_slice(b.amplitudes());
        va.dotc(&(&self.matrix * vb))
    }

    pub fn expectation(&self, state: &StateVector) -> Complex64 {
        self.element(state, state)
    }

    /// Largest entry of `M†M − I`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        (self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Basis indices with exactly `n_particles` set bits, ascending.
pub fn sector_indices(n_qubits: usize, n_particles: usize) -> Vec<usize> {
    (0..1usize << n_qubits)
        .filter(|b| b.count_ones() as usize == n_particles)
        .collect()
}

fn lowest_eigenvalue(m: DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("empty particle-number sector".into()));
    }
    let anti = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if anti > 1e-10 {
        return Err(Error::NonHermitian(anti));
    }
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Lowest eigenvalue of the Pauli-sum matrix restricted to states with
/// `n_particles` occupied qubits.
pub fn exact_ground_energy(h: &PauliSum, n_particles: usize) -> Result<f64> {
    let n = h.n_qubits();
    check_size(n, DENSE_LIMIT)?;
    let basis = sector_indices(n, n_particles);
    let pos: std::collections::HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let d = basis.len();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for (p, c) in h.terms() {
        for (j, &col) in basis.iter().enumerate() {
            let row = pauli_row(p, col, n);
            if let Some(&i) = pos.get(&row) {
                m[(i, j)] += c * pauli_element(p, row, col, n);
            }
        }
    }
    lowest_eigenvalue(m)
}

/// Ground energy over the full register, no sector restriction.
pub fn full_space_ground_energy(h: &PauliSum) -> Result<f64> {
    lowest_eigenvalue(DenseOperator::from_pauli_sum(h)?.matrix)
}

/// Applies a ladder string (rightmost first) to an occupation bitstring
/// (bit `p` = spin orbital `p`). Returns the sign and the resulting string.
fn apply_ladders(ops: &[Ladder], det: u64) -> Option<(f64, u64)> {
    let mut det = det;
    let mut sign = 1.0;
    for &op in ops.iter().rev() {
        let p = op.index();
        let occupied = det >> p & 1 == 1;
        match (op, occupied) {
            (Ladder::Create(_), false) | (Ladder::Annihilate(_), true) => {
                if (det & ((1u64 << p) - 1)).count_ones() % 2 == 1 {
                    sign = -sign;
                }
                det ^= 1 << p;
            }
            _ => return None,
        }
    }
    Some((sign, det))
}

/// Full configuration interaction in the Slater-determinant basis, assembled
/// directly from `h_pq` and `<pq||rs>` with second-quantized sign bookkeeping.
/// Diagonalizes the sector with the reference's electron count.
pub fn determinant_fci(h: &SpinOrbitalHamiltonian) -> Result<f64> {
    let n = h.n_so;
    if n > 16 {
        return Err(Error::DimensionTooLarge { qubits: n, limit: 16 });
    }
    let ne = h.nelec();
    let dets: Vec<u64> = (0..1u64 << n).filter(|d| d.count_ones() as usize == ne).collect();
    let pos: std::collections::HashMap<u64, usize> = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let d = dets.len();
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (j, &det) in dets.iter().enumerate() {
        m[(j, j)] += h.core_energy;
        for p in 0..n {
            for q in 0..n {
                let v = h.h1[(p, q)];
                if v == 0.0 {
                    continue;
                }
                if let Some((s, out)) = apply_ladders(&[Ladder::Create(p), Ladder::Annihilate(q)], det) {
                    m[(pos[&out], j)] += s * v;
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s_ in 0..n {
                        let v = h.antisym(p, q, r, s_);
                        if v == 0.0 {
                            continue;
                        }
                        let ops = [
                            Ladder::Create(p),
                            Ladder::Create(q),
                            Ladder::Annihilate(s_),
                            Ladder::Annihilate(r),
                        ];
                        if let Some((s, out)) = apply_ladders(&ops, det) {
                            m[(pos[&out], j)] += 0.25 * s * v;
                        }
                    }
                }
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `exp(θ·K)` by scaling and squaring with a Taylor core.
pub fn dense_exponential(kappa: &PauliSum, theta: f64) -> Result<DenseOperator> {
    let n = kappa.n_qubits();
    check_size(n, EXPONENTIAL_LIMIT)?;
    let a = DenseOperator::from_pauli_sum(kappa)?.matrix * Complex64::new(theta, 0.0);
    let d = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(0.0);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * Complex64::new(scale, 0.0);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..=20 {
        term = &term * &a * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(DenseOperator {
        n_qubits: n,
        matrix: sum,
    })
}

/// Central-difference Jacobian: column `j` is `(G(x + s e_j) − G(x − s e_j)) / 2s`.
pub fn finite_difference_jacobian<F>(map: F, point: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let n = point.len();
    let mut jac: Option<DMatrix<f64>> = None;
    let mut x = point.to_vec();
    for j in 0..n {
        x[j] = point[j] + step;
        let plus = map(&x)?;
        x[j] = point[j] - step;
        let minus = map(&x)?;
        x[j] = point[j];
        if plus.len() != minus.len() {
            return Err(Error::LengthMismatch {
                expected: plus.len(),
                got: minus.len(),
            });
        }
        let m = jac.get_or_insert_with(|| DMatrix::zeros(plus.len(), n));
        for i in 0..plus.len() {
            let v = (plus[i] - minus[i]) / (2.0 * step);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("jacobian entry ({i}, {j})")));
            }
            m[(i, j)] = v;
        }
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}
