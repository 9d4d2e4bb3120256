use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

/// Coefficients with magnitude at or below this are dropped by [`PauliSum::simplify`].
pub const SIMPLIFY_TOL: f64 = 1e-12;

/// Maximum qubit count representable by the bitmask encoding.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A tensor product of single-qubit Paulis in symplectic form: bit `q` of
/// `x`/`z` describes qubit `q` (`X = (1,0)`, `Y = (1,1)`, `Z = (0,1)`).
/// Identities are implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn from_masks(x: u64, z: u64) -> Self {
        Self { x, z }
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        assert!(qubit < MAX_QUBITS, "qubit {qubit} out of range");
        let bit = 1u64 << qubit;
        match p {
            Pauli::I => Self::IDENTITY,
            Pauli::X => Self { x: bit, z: 0 },
            Pauli::Y => Self { x: bit, z: bit },
            Pauli::Z => Self { x: 0, z: bit },
        }
    }

    pub fn from_letters(letters: &[(usize, Pauli)]) -> Self {
        letters.iter().fold(Self::IDENTITY, |acc, &(q, p)| {
            let s = Self::single(q, p);
            Self {
                x: acc.x ^ s.x,
                z: acc.z ^ s.z,
            }
        })
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        match ((self.x >> qubit) & 1, (self.z >> qubit) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Highest qubit with a non-identity letter, plus one.
    pub fn span(&self) -> usize {
        MAX_QUBITS - (self.x | self.z).leading_zeros() as usize
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// `self · other = phase · result`.
    pub fn multiply(&self, other: &Self) -> (Complex64, PauliString) {
        let out = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        // P = i^{|x&z|} X^x Z^z and Z^a X^b = (-1)^{|a&b|} X^b Z^a.
        let k = self.y_count() as i64 + other.y_count() as i64 - out.y_count() as i64
            + 2 * (self.z & other.x).count_ones() as i64;
        (i_pow(k), out)
    }

    pub fn to_label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| match self.get(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in 0..self.span() {
            let p = self.get(q);
            if p != Pauli::I {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{p:?}{q}")?;
                first = false;
            }
        }
        Ok(())
    }
}

pub(crate) fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Complex-weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        Self::from_term(n_qubits, PauliString::IDENTITY, Complex64::new(coeff, 0.0))
    }

    pub fn from_term(n_qubits: usize, p: PauliString, coeff: Complex64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(p, coeff);
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, p: PauliString, coeff: Complex64) {
        assert!(p.span() <= self.n_qubits, "term {p} exceeds {} qubits", self.n_qubits);
        *self.terms.entry(p).or_default() += coeff;
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, v)| (*p, v * c)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, v)| (*p, v.conj())).collect(),
        }
    }

    /// Drops coefficients with magnitude `<= SIMPLIFY_TOL`.
    pub fn simplify(mut self) -> Self {
        self.terms.retain(|_, v| v.norm() > SIMPLIFY_TOL);
        self
    }

    pub fn commutator(&self, other: &Self) -> Self {
        (self * other - other * self).simplify()
    }

    /// Largest coefficient magnitude of the anti-Hermitian part.
    pub fn anti_hermitian_norm(&self) -> f64 {
        self.terms.values().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_norm() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|v| v.re.abs() <= tol)
    }

    /// `Σ_l |h_l|` over all terms, identity included.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).sum()
    }

    /// `Σ_l |h_l|` over non-identity terms only.
    pub fn one_norm_without_identity(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(p, _)| !p.is_identity())
            .map(|(_, v)| v.norm())
            .sum()
    }

    /// True when every term commutes with every other.
    pub fn terms_commute(&self) -> bool {
        let keys: Vec<_> = self.terms.keys().collect();
        keys.iter()
            .enumerate()
            .all(|(i, a)| keys[i + 1..].iter().all(|b| a.commutes_with(b)))
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.n_qubits, other.n_qubits, "qubit count mismatch");
        let mut out = self.clone();
        for (p, v) in &other.terms {
            out.add_term(*p, v * sign);
        }
        out
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.combine(rhs, 1.0)
    }
}

impl Add for PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: PauliSum) -> PauliSum {
        self.combine(&rhs, 1.0)
    }
}

impl AddAssign<&PauliSum> for PauliSum {
    fn add_assign(&mut self, rhs: &PauliSum) {
        assert_eq!(self.n_qubits, rhs.n_qubits, "qubit count mismatch");
        for (p, v) in &rhs.terms {
            self.add_term(*p, *v);
        }
    }
}

impl Sub for &PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: &PauliSum) -> PauliSum {
        self.combine(rhs, -1.0)
    }
}

impl Sub for PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: PauliSum) -> PauliSum {
        self.combine(&rhs, -1.0)
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, rhs.n_qubits, "qubit count mismatch");
        let mut out = PauliSum::zero(self.n_qubits);
        for (p, a) in &self.terms {
            for (q, b) in &rhs.terms {
                let (phase, r) = p.multiply(q);
                out.add_term(r, a * b * phase);
            }
        }
        out
    }
}
