use std::sync::OnceLock;

use crate::chem::{element, BondOrder, Molecule};

use super::smarts::Smarts;

const LIPINSKI: &str = include_str!("../../data/lipinski.smarts");

pub(crate) struct Named {
    pub donor: Smarts,
    pub acceptor: Smarts,
    pub rotatable: Smarts,
    pub aliphatic_ring_atom: Smarts,
}

pub(crate) fn named() -> &'static Named {
    static T: OnceLock<Named> = OnceLock::new();
    T.get_or_init(|| {
        let get = |name: &str| {
            let line = LIPINSKI
                .lines()
                .filter(|l| !l.starts_with('#'))
                .find_map(|l| l.strip_prefix(name).and_then(|r| r.strip_prefix('\t')))
                .unwrap_or_else(|| panic!("lipinski table: missing {name}"));
            Smarts::new(line.trim()).unwrap_or_else(|e| panic!("lipinski table: {name}: {e}"))
        };
        Named {
            donor: get("HDonor"),
            acceptor: get("HAcceptor"),
            rotatable: get("RotatableBond"),
            aliphatic_ring_atom: get("AliphaticRingAtom"),
        }
    })
}

pub fn heavy_atom_count(mol: &Molecule) -> usize {
    mol.heavy_atom_count()
}

pub fn num_h_donors(mol: &Molecule) -> usize {
    named().donor.count(mol)
}

pub fn num_h_acceptors(mol: &Molecule) -> usize {
    named().acceptor.count(mol)
}

/// Rotatable bonds under the strict definition: no terminal atoms, triple
/// bonds, CX3 groups, or amide/thioamide C-N bonds.
pub fn num_rotatable_bonds(mol: &Molecule) -> usize {
    named().rotatable.count(mol)
}

pub fn ring_count(mol: &Molecule) -> usize {
    mol.ring_info().num_rings()
}

/// SSSR rings whose bonds are all aromatic.
pub fn num_aromatic_rings(mol: &Molecule) -> usize {
    mol.ring_info()
        .ring_bonds()
        .iter()
        .filter(|r| r.iter().all(|&b| mol.bond(b).order == BondOrder::Aromatic))
        .count()
}

/// Share of carbons with four single-bond electron domains.
pub fn fraction_csp3(mol: &Molecule) -> f64 {
    let mut carbons = 0;
    let mut sp3 = 0;
    for (i, a) in mol.atoms().iter().enumerate() {
        if a.element != 6 {
            continue;
        }
        carbons += 1;
        let saturated = !a.aromatic && mol.neighbors(i).iter().all(|&(_, b)| mol.bond(b).order == BondOrder::Single);
        // a carbocation has three domains, a carbanion keeps four
        if saturated && a.charge <= 0 && mol.total_valence(i) as i32 - a.charge as i32 >= 4 {
            sp3 += 1;
        }
    }
    if carbons == 0 {
        0.0
    } else {
        sp3 as f64 / carbons as f64
    }
}

pub fn formal_charge(mol: &Molecule) -> i32 {
    mol.atoms().iter().map(|a| a.charge as i32).sum()
}

pub fn num_halogens(mol: &Molecule) -> usize {
    mol.atoms().iter().filter(|a| element::is_halogen(a.element)).count()
}

/// Atoms other than carbon and hydrogen.
pub fn num_heteroatoms(mol: &Molecule) -> usize {
    mol.atoms().iter().filter(|a| a.element != 6 && a.element != 1).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn m(s: &str) -> Molecule {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn benzene_counts() {
        let b = m("c1ccccc1");
        assert_eq!(num_h_donors(&b), 0);
        assert_eq!(num_h_acceptors(&b), 0);
        assert_eq!(num_aromatic_rings(&b), 1);
        assert_eq!(ring_count(&b), 1);
        assert_eq!(fraction_csp3(&b), 0.0);
    }

    #[test]
    fn donors_and_acceptors() {
        let x = m("OCC(=O)NC");
        assert_eq!(num_h_donors(&x), 2);
        assert_eq!(num_h_acceptors(&x), 2);
    }

    #[test]
    fn amide_bond_is_not_rotatable() {
        assert_eq!(num_rotatable_bonds(&m("CC(=O)NC")), 0);
        assert_eq!(num_rotatable_bonds(&m("CCCC")), 1);
        assert_eq!(num_rotatable_bonds(&m("c1ccccc1-c1ccccc1")), 1);
    }

    #[test]
    fn small_counts() {
        let x = m("FC(Cl)C(=O)[O-].[Na+]");
        assert_eq!(num_halogens(&x), 2);
        assert_eq!(num_heteroatoms(&x), 5);
        assert_eq!(formal_charge(&x), 0);
        assert_eq!(heavy_atom_count(&x), 7);
        assert!((fraction_csp3(&m("CCC=C")) - 0.5).abs() < 1e-12);
    }
}
