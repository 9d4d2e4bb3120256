//! Second-quantized Hamiltonian input: FCIDUMP integrals, Hubbard chains,
//! spin-orbital lifting, Fock diagonals and perturbative denominators.

mod fcidump;
mod hubbard;

pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use hubbard::build_hubbard_chain;

use nalgebra::DMatrix;

use crate::operators::Excitation;
use crate::{Error, Result};

/// Off-diagonal Fock magnitude above which the reference is reported as non-canonical.
pub const FOCK_OFFDIAG_WARN: f64 = 1e-6;

/// Denominators smaller than this in magnitude are treated as a degenerate gap.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-8;

/// Spatial-orbital integrals in chemist notation.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub core_energy: f64,
    /// `norb × norb` one-electron integrals.
    pub h1: DMatrix<f64>,
    /// `(pq|rs)` stored densely, row-major over `(p, q, r, s)`.
    pub g2: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn zeros(norb: usize, nelec: usize) -> Self {
        Self {
            norb,
            nelec,
            ms2: 0,
            core_energy: 0.0,
            h1: DMatrix::zeros(norb, norb),
            g2: vec![0.0; norb.pow(4)],
        }
    }

    #[inline]
    fn g2_index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.norb;
        ((p * n + q) * n + r) * n + s
    }

    /// `(pq|rs)`.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.g2[self.g2_index(p, q, r, s)]
    }

    /// Sets `(pq|rs)` together with its seven permutational partners.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in eri_permutations(p, q, r, s) {
            let idx = self.g2_index(a, b, c, d);
            self.g2[idx] = value;
        }
    }

    pub fn set_h1(&mut self, p: usize, q: usize, value: f64) {
        self.h1[(p, q)] = value;
        self.h1[(q, p)] = value;
    }

    fn validate(&self) -> Result<()> {
        if self.norb == 0 {
            return Err(Error::InvalidSystem("norb must be at least 1".into()));
        }
        if self.nelec > 2 * self.norb {
            return Err(Error::InvalidSystem(format!(
                "nelec {} exceeds 2*norb = {}",
                self.nelec,
                2 * self.norb
            )));
        }
        if self.ms2.unsigned_abs() as usize > self.nelec || (self.nelec as i64 + self.ms2) % 2 != 0 {
            return Err(Error::InvalidSystem(format!(
                "ms2 {} incompatible with nelec {}",
                self.ms2, self.nelec
            )));
        }
        Ok(())
    }
}

/// The eight index orderings sharing a real chemist-notation integral.
pub fn eri_permutations(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

/// Spin-orbital Hamiltonian with interleaved indexing: `2p` is α and `2p + 1`
/// is β of spatial orbital `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOrbitalHamiltonian {
    pub n_so: usize,
    pub core_energy: f64,
    pub h1: DMatrix<f64>,
    /// Antisymmetrized `<pq||rs>`, row-major over `(p, q, r, s)`.
    pub g2_anti: Vec<f64>,
    /// Occupied spin orbitals of the reference determinant, ascending.
    pub occupation: Vec<usize>,
}

impl SpinOrbitalHamiltonian {
    #[inline]
    pub fn antisym(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_so;
        self.g2_anti[((p * n + q) * n + r) * n + s]
    }

    pub fn nelec(&self) -> usize {
        self.occupation.len()
    }

    pub fn is_occupied(&self, p: usize) -> bool {
        self.occupation.binary_search(&p).is_ok()
    }

    pub fn virtuals(&self) -> Vec<usize> {
        (0..self.n_so).filter(|&p| !self.is_occupied(p)).collect()
    }

    /// Closed-form reference energy `E_core + Σ_i h_ii + ½ Σ_ij <ij||ij>`.
    pub fn hf_energy(&self) -> f64 {
        let occ = &self.occupation;
        let one: f64 = occ.iter().map(|&i| self.h1[(i, i)]).sum();
        let mut two = 0.0;
        for &i in occ {
            for &j in occ {
                two += self.antisym(i, j, i, j);
            }
        }
        self.core_energy + one + 0.5 * two
    }

    /// Full Fock matrix `f_pq = h_pq + Σ_i <pi||qi>` over the reference occupation.
    pub fn fock_matrix(&self) -> DMatrix<f64> {
        let n = self.n_so;
        DMatrix::from_fn(n, n, |p, q| {
            self.h1[(p, q)] + self.occupation.iter().map(|&i| self.antisym(p, i, q, i)).sum::<f64>()
        })
    }

    /// Hamiltonian with the two-body part removed.
    pub fn one_body_only(&self) -> Self {
        Self {
            g2_anti: vec![0.0; self.g2_anti.len()],
            ..self.clone()
        }
    }
}

/// Diagonal Fock elements per spin orbital.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalEnergies {
    pub eps: Vec<f64>,
}

impl OrbitalEnergies {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

/// Lifts spatial integrals to spin orbitals and fixes the reference occupation:
/// the lowest `n_α` α and lowest `n_β` β spin orbitals, `n_α − n_β = ms2`.
pub fn spatial_to_spin_orbital(mi: &MolecularIntegrals) -> Result<SpinOrbitalHamiltonian> {
    mi.validate()?;
    let norb = mi.norb;
    let n = 2 * norb;
    let h1 = DMatrix::from_fn(n, n, |p, q| if p % 2 == q % 2 { mi.h1[(p / 2, q / 2)] } else { 0.0 });

    // <pq|rs> = (pr|qs) with spin selection on (p,r) and (q,s).
    let coulomb = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        if p % 2 == r % 2 && q % 2 == s % 2 {
            mi.eri(p / 2, r / 2, q / 2, s / 2)
        } else {
            0.0
        }
    };
    let mut g2_anti = vec![0.0; n.pow(4)];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    g2_anti[((p * n + q) * n + r) * n + s] = coulomb(p, q, r, s) - coulomb(p, q, s, r);
                }
            }
        }
    }

    let n_alpha = ((mi.nelec as i64 + mi.ms2) / 2) as usize;
    let n_beta = mi.nelec - n_alpha;
    if n_alpha > norb || n_beta > norb {
        return Err(Error::InvalidSystem(format!(
            "cannot place {n_alpha} alpha / {n_beta} beta electrons in {norb} orbitals"
        )));
    }
    let mut occupation: Vec<usize> = (0..n_alpha)
        .map(|p| 2 * p)
        .chain((0..n_beta).map(|p| 2 * p + 1))
        .collect();
    occupation.sort_unstable();

    Ok(SpinOrbitalHamiltonian {
        n_so: n,
        core_energy: mi.core_energy,
        h1,
        g2_anti,
        occupation,
    })
}

/// Diagonal Fock elements `ε_p = h_pp + Σ_i <pi||pi>`. Logs a warning when the
/// orbitals are not canonical.
pub fn compute_fock(h: &SpinOrbitalHamiltonian) -> OrbitalEnergies {
    let f = h.fock_matrix();
    let n = h.n_so;
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                worst = worst.max(f[(p, q)].abs());
            }
        }
    }
    if worst > FOCK_OFFDIAG_WARN {
        log::warn!("non-canonical reference: max off-diagonal Fock element {worst:e}");
    }
    OrbitalEnergies {
        eps: (0..n).map(|p| f[(p, p)]).collect(),
    }
}

/// `D_μ = Σ_occ ε − Σ_virt ε`; negative for a gapped canonical reference.
pub fn mp2_denominator(exc: &Excitation, eps: &OrbitalEnergies) -> Result<f64> {
    if exc.occ().iter().chain(exc.virt()).any(|&p| p >= eps.len()) {
        return Err(Error::InvalidArgument(format!(
            "excitation {exc} indexes beyond {} spin orbitals",
            eps.len()
        )));
    }
    let d: f64 =
        exc.occ().iter().map(|&i| eps.eps[i]).sum::<f64>() - exc.virt().iter().map(|&a| eps.eps[a]).sum::<f64>();
    if d.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateDenominator {
            excitation: exc.to_string(),
            value: d,
        });
    }
    Ok(d)
}

/// Denominators for a list of excitations, in order.
pub fn denominators(excitations: &[Excitation], eps: &OrbitalEnergies) -> Result<Vec<f64>> {
    excitations.iter().map(|e| mp2_denominator(e, eps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2_like() -> MolecularIntegrals {
        let mut mi = MolecularIntegrals::zeros(2, 2);
        mi.core_energy = 0.7;
        mi.set_h1(0, 0, -1.25);
        mi.set_h1(1, 1, -0.47);
        mi.set_eri(0, 0, 0, 0, 0.67);
        mi.set_eri(1, 1, 1, 1, 0.70);
        mi.set_eri(0, 0, 1, 1, 0.66);
        mi.set_eri(0, 1, 0, 1, 0.18);
        mi
    }

    #[test]
    fn single_orbital_spin_lifting() {
        let mut mi = MolecularIntegrals::zeros(1, 2);
        mi.set_h1(0, 0, -0.9);
        let h = spatial_to_spin_orbital(&mi).unwrap();
        assert_eq!(h.n_so, 2);
        assert_eq!(h.h1[(0, 0)], -0.9);
        assert_eq!(h.h1[(1, 1)], -0.9);
        assert_eq!(h.h1[(0, 1)], 0.0);
        assert_eq!(h.occupation, vec![0, 1]);
    }

    #[test]
    fn antisymmetry_exhaustive() {
        let h = spatial_to_spin_orbital(&h2_like()).unwrap();
        let n = h.n_so;
        for p in 0..n {
            assert_eq!(h.antisym(p, p, p, p), 0.0);
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = h.antisym(p, q, r, s);
                        assert_eq!(v, -h.antisym(q, p, r, s));
                        assert_eq!(v, -h.antisym(p, q, s, r));
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_beta_blocks_vanish() {
        let h = spatial_to_spin_orbital(&h2_like()).unwrap();
        for p in 0..h.n_so {
            for q in 0..h.n_so {
                if p % 2 != q % 2 {
                    assert_eq!(h.h1[(p, q)], 0.0);
                }
            }
        }
    }

    #[test]
    fn fock_without_two_body_is_h_diagonal() {
        let mut mi = h2_like();
        mi.g2.iter_mut().for_each(|v| *v = 0.0);
        let h = spatial_to_spin_orbital(&mi).unwrap();
        let eps = compute_fock(&h);
        for p in 0..h.n_so {
            assert_eq!(eps.eps[p], h.h1[(p, p)]);
        }
    }

    #[test]
    fn denominators_follow_occ_minus_virt() {
        let eps = OrbitalEnergies {
            eps: vec![-0.6, -0.6, 0.7, 0.7],
        };
        let s = Excitation::new(vec![0], vec![2]).unwrap();
        assert!((mp2_denominator(&s, &eps).unwrap() - (-1.3)).abs() < 1e-15);
        let d = Excitation::new(vec![0, 1], vec![2, 3]).unwrap();
        assert!((mp2_denominator(&d, &eps).unwrap() - (-2.6)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominator_is_an_error() {
        let eps = OrbitalEnergies {
            eps: vec![0.1, 0.1, 0.1, 0.1],
        };
        let s = Excitation::new(vec![0], vec![2]).unwrap();
        assert!(matches!(
            mp2_denominator(&s, &eps),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn too_many_electrons_rejected() {
        let mi = MolecularIntegrals::zeros(1, 3);
        assert!(spatial_to_spin_orbital(&mi).is_err());
    }
}
