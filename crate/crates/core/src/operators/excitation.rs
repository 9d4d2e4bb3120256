use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hamiltonian::SpinOrbitalHamiltonian;
use crate::{Error, Result};

/// Particle-hole excitation `τ = a†_a a†_b … a_j a_i` (occupied `i < j < …`,
/// virtual `a < b < …`). The generator is `κ = τ − τ†`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawExcitation")]
pub struct Excitation {
    occ: Vec<usize>,
    virt: Vec<usize>,
}

#[derive(Deserialize)]
struct RawExcitation {
    occ: Vec<usize>,
    virt: Vec<usize>,
}

impl TryFrom<RawExcitation> for Excitation {
    type Error = crate::Error;

    fn try_from(raw: RawExcitation) -> Result<Self> {
        Self::new(raw.occ, raw.virt)
    }
}

fn alpha_count(idx: &[usize]) -> usize {
    idx.iter().filter(|&&p| p % 2 == 0).count()
}

impl Excitation {
    pub fn new(occ: Vec<usize>, virt: Vec<usize>) -> Result<Self> {
        if occ.is_empty() || occ.len() != virt.len() {
            return Err(Error::InvalidArgument(format!(
                "excitation needs matching non-empty index lists, got {occ:?} -> {virt:?}"
            )));
        }
        let increasing = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&occ) || !increasing(&virt) {
            return Err(Error::InvalidArgument(format!(
                "indices must be strictly increasing: {occ:?} -> {virt:?}"
            )));
        }
        if occ.iter().any(|p| virt.contains(p)) {
            return Err(Error::InvalidArgument(format!(
                "occupied and virtual overlap: {occ:?} -> {virt:?}"
            )));
        }
        if alpha_count(&occ) != alpha_count(&virt) {
            return Err(Error::InvalidArgument(format!(
                "excitation {occ:?} -> {virt:?} changes Sz"
            )));
        }
        Ok(Self { occ, virt })
    }

    pub fn single(i: usize, a: usize) -> Result<Self> {
        Self::new(vec![i], vec![a])
    }

    pub fn double(i: usize, j: usize, a: usize, b: usize) -> Result<Self> {
        Self::new(vec![i, j], vec![a, b])
    }

    pub fn occ(&self) -> &[usize] {
        &self.occ
    }

    pub fn virt(&self) -> &[usize] {
        &self.virt
    }

    pub fn rank(&self) -> usize {
        self.occ.len()
    }

    pub fn max_index(&self) -> usize {
        *self.occ.iter().chain(&self.virt).max().unwrap()
    }

    /// Every spin orbital the generator touches.
    pub fn qubits(&self) -> Vec<usize> {
        let mut q: Vec<usize> = self.occ.iter().chain(&self.virt).copied().collect();
        q.sort_unstable();
        q
    }
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{}->{}", join(&self.occ), join(&self.virt))
    }
}

/// All Sz-preserving singles and doubles relative to the reference occupation,
/// ordered by rank and then lexicographically by `(occ, virt)`.
pub fn excitation_pool(h: &SpinOrbitalHamiltonian) -> Vec<Excitation> {
    let occ = &h.occupation;
    let virt = h.virtuals();
    let mut pool = Vec::new();
    for &i in occ {
        for &a in &virt {
            if i % 2 == a % 2 {
                pool.push(Excitation {
                    occ: vec![i],
                    virt: vec![a],
                });
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    if alpha_count(&[i, j]) == alpha_count(&[a, b]) {
                        pool.push(Excitation {
                            occ: vec![i, j],
                            virt: vec![a, b],
                        });
                    }
                }
            }
        }
    }
    pool
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{spatial_to_spin_orbital, MolecularIntegrals};

    fn pool_for(norb: usize, nelec: usize) -> Vec<Excitation> {
        let h = spatial_to_spin_orbital(&MolecularIntegrals::zeros(norb, nelec)).unwrap();
        excitation_pool(&h)
    }

    #[test]
    fn h2_sized_pool() {
        let pool = pool_for(2, 2);
        assert_eq!(pool.iter().filter(|e| e.rank() == 1).count(), 2);
        assert_eq!(pool.iter().filter(|e| e.rank() == 2).count(), 1);
        assert_eq!(pool.len(), 3);
    }

    #[test]
    fn h4_sized_pool() {
        let pool = pool_for(4, 4);
        assert_eq!(pool.iter().filter(|e| e.rank() == 1).count(), 8);
        let doubles: Vec<_> = pool.iter().filter(|e| e.rank() == 2).collect();
        assert_eq!(doubles.len(), 18);
        let same_spin = doubles.iter().filter(|e| e.occ()[0] % 2 == e.occ()[1] % 2).count();
        assert_eq!(same_spin, 2);
    }

    #[test]
    fn no_virtuals_empty_pool() {
        assert!(pool_for(2, 4).is_empty());
    }

    #[test]
    fn pool_is_sorted_by_rank_then_indices() {
        let pool = pool_for(4, 4);
        for w in pool.windows(2) {
            assert!((w[0].rank(), &w[0]) < (w[1].rank(), &w[1]));
        }
    }

    #[test]
    fn constructor_rejects_invalid() {
        assert!(Excitation::new(vec![1, 0], vec![2, 3]).is_err());
        assert!(Excitation::new(vec![0], vec![0]).is_err());
        assert!(Excitation::new(vec![0], vec![3]).is_err());
        assert!(Excitation::new(vec![], vec![]).is_err());
    }
}
