use nalgebra::{DMatrix, SymmetricEigen};

use super::{compute_fock, spatial_to_spin_orbital, MolecularIntegrals, OrbitalEnergies, SpinOrbitalHamiltonian};
use crate::{Error, Result};

/// Open-boundary Hubbard chain `-t Σ (c†_i c_j + h.c.) + U Σ n_i↑ n_i↓`,
/// rotated into the eigenbasis of the hopping matrix (orbitals sorted by
/// energy, each eigenvector's first nonzero component made positive).
pub fn build_hubbard_chain(
    sites: usize,
    t: f64,
    u: f64,
    nelec: usize,
) -> Result<(SpinOrbitalHamiltonian, OrbitalEnergies)> {
    if sites == 0 {
        return Err(Error::InvalidSystem("hubbard chain needs at least one site".into()));
    }
    if nelec > 2 * sites {
        return Err(Error::InvalidSystem(format!(
            "nelec {nelec} exceeds 2*sites = {}",
            2 * sites
        )));
    }
    let hop = DMatrix::from_fn(sites, sites, |i, j| if i.abs_diff(j) == 1 { -t } else { 0.0 });
    let eig = SymmetricEigen::new(hop);
    let mut order: Vec<usize> = (0..sites).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut c = DMatrix::zeros(sites, sites);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).clone_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        c.set_column(col, &v);
    }

    let mut mi = MolecularIntegrals::zeros(sites, nelec);
    mi.ms2 = (nelec % 2) as i64;
    for (p, &k) in order.iter().enumerate() {
        mi.set_h1(p, p, eig.eigenvalues[k]);
    }
    for p in 0..sites {
        for q in 0..sites {
            for r in 0..sites {
                for s in 0..sites {
                    let v: f64 = (0..sites).map(|i| c[(i, p)] * c[(i, q)] * c[(i, r)] * c[(i, s)]).sum();
                    let idx = ((p * sites + q) * sites + r) * sites + s;
                    mi.g2[idx] = u * v;
                }
            }
        }
    }
    let h = spatial_to_spin_orbital(&mi)?;
    let eps = compute_fock(&h);
    Ok((h, eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noninteracting_dimer_fills_bonding_orbital() {
        let (h, eps) = build_hubbard_chain(2, 1.0, 0.0, 2).unwrap();
        assert!((h.hf_energy() + 2.0).abs() < 1e-12);
        assert!((eps.eps[0] + 1.0).abs() < 1e-12);
        assert!((eps.eps[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_site_doubly_occupied() {
        for t in [0.0, 1.0, 3.5] {
            let (h, _) = build_hubbard_chain(1, t, 2.0, 2).unwrap();
            assert!((h.hf_energy() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn half_filled_chain_reference_is_canonical() {
        let (h, _) = build_hubbard_chain(4, 1.0, 3.0, 4).unwrap();
        let f = h.fock_matrix();
        for p in 0..h.n_so {
            for q in 0..h.n_so {
                if p != q {
                    assert!(f[(p, q)].abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_hubbard_chain(0, 1.0, 1.0, 0).is_err());
        assert!(build_hubbard_chain(2, 1.0, 1.0, 5).is_err());
    }
}
