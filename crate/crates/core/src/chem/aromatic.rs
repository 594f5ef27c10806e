//! Hückel aromaticity over SSSR rings and fused ring combinations.

use std::collections::BTreeSet;

use super::element;
use super::mol::{BondOrder, Molecule};

/// Largest number of fused rings combined when testing a ring system.
const MAX_FUSED_RINGS: usize = 6;

/// Pi electrons an atom can put into a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Donor {
    Vacant,
    One,
    Two,
}

impl Donor {
    fn electrons(self) -> u32 {
        match self {
            Donor::Vacant => 0,
            Donor::One => 1,
            Donor::Two => 2,
        }
    }
}

/// Recomputes aromatic flags from the Kekulé structure.
pub(crate) fn perceive_aromaticity(mol: &mut Molecule) {
    for a in mol.atoms_mut() {
        a.aromatic = false;
    }
    for b in mol.bonds_mut() {
        b.order = b.kekule;
    }
    let donors: Vec<Option<Donor>> = (0..mol.num_atoms()).map(|i| donor_type(mol, i)).collect();
    let info = mol.ring_info();
    let candidates: Vec<usize> = (0..info.num_rings())
        .filter(|&r| info.rings()[r].iter().all(|&a| donors[a].is_some()))
        .collect();
    // rings are fused neighbours when they share exactly one bond; rings
    // overlapping along a longer path (porphyrin cores against their
    // pyrroles) are treated separately
    let shares_bond =
        |r1: usize, r2: usize| info.ring_bonds()[r1].iter().filter(|b| info.ring_bonds()[r2].contains(b)).count() == 1;

    // fused systems: candidate rings connected through shared bonds
    let mut system_of = vec![usize::MAX; candidates.len()];
    let mut systems: Vec<Vec<usize>> = Vec::new();
    for s in 0..candidates.len() {
        if system_of[s] != usize::MAX {
            continue;
        }
        let id = systems.len();
        system_of[s] = id;
        let mut members = vec![s];
        let mut k = 0;
        while k < members.len() {
            let cur = members[k];
            for o in 0..candidates.len() {
                if system_of[o] == usize::MAX && shares_bond(candidates[cur], candidates[o]) {
                    system_of[o] = id;
                    members.push(o);
                }
            }
            k += 1;
        }
        systems.push(members.into_iter().map(|m| candidates[m]).collect());
    }

    let mut arom_atoms = vec![false; mol.num_atoms()];
    let mut arom_bonds = vec![false; mol.num_bonds()];
    for system in &systems {
        let system_bonds: BTreeSet<usize> = system.iter().flat_map(|&r| info.ring_bonds()[r].iter().copied()).collect();
        for size in 1..=system.len().min(MAX_FUSED_RINGS) {
            if system_bonds.iter().all(|&b| arom_bonds[b]) {
                break;
            }
            for combo in combinations(system.len(), size) {
                let rings: Vec<usize> = combo.iter().map(|&i| system[i]).collect();
                if !is_connected(&rings, &shares_bond) {
                    continue;
                }
                if rings.iter().all(|&r| info.ring_bonds()[r].iter().all(|&b| arom_bonds[b])) {
                    continue;
                }
                // atoms shared by three or more rings of the combination sit
                // inside it and take no part in the perimeter count
                let mut membership = std::collections::BTreeMap::<usize, usize>::new();
                for &r in &rings {
                    for &a in &info.rings()[r] {
                        *membership.entry(a).or_default() += 1;
                    }
                }
                let union: BTreeSet<usize> = membership.iter().filter(|(_, &c)| c <= 2).map(|(&a, _)| a).collect();
                let electrons: u32 = union.iter().map(|&a| donors[a].unwrap().electrons()).sum();
                if is_huckel(electrons) {
                    for &a in &union {
                        arom_atoms[a] = true;
                    }
                    // bonds on the perimeter of the combination: fusion bonds
                    // shared by two of its rings stay as they are
                    let mut count = std::collections::BTreeMap::<usize, usize>::new();
                    for &r in &rings {
                        for &b in &info.ring_bonds()[r] {
                            *count.entry(b).or_default() += 1;
                        }
                    }
                    for (b, c) in count {
                        if c % 2 == 1 {
                            arom_bonds[b] = true;
                        }
                    }
                }
            }
        }
    }
    for (a, flag) in mol.atoms_mut().iter_mut().zip(&arom_atoms) {
        a.aromatic = *flag;
    }
    for (b, flag) in mol.bonds_mut().iter_mut().zip(&arom_bonds) {
        if *flag {
            b.order = BondOrder::Aromatic;
        }
    }
}

fn is_huckel(electrons: u32) -> bool {
    if electrons >= 6 {
        (electrons - 2) % 4 == 0
    } else {
        electrons == 2
    }
}

fn is_connected(rings: &[usize], shares_bond: &dyn Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; rings.len()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..rings.len() {
            if !seen[j] && shares_bond(rings[i], rings[j]) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Electrons available for the pi system, or None when the atom cannot be
/// aromatic (saturated, hypervalent, univalent, ...).
fn count_electrons(mol: &Molecule, i: usize) -> Option<i32> {
    let a = mol.atom(i);
    let dv = element::default_valence(a.element)? as i32;
    if dv <= 1 {
        return None;
    }
    let degree = mol.degree(i) as i32 + a.explicit_h as i32 + a.implicit_h as i32;
    if degree > 3 {
        return None;
    }
    let outer = element::element(a.element)?.outer_electrons as i32;
    let nlp = (outer - dv - a.charge as i32).max(0);
    let mut res = (dv - degree) + nlp;
    if res > 1 && unsaturations(mol, i) > 1 {
        res = 1;
    }
    Some(res)
}

fn explicit_valence(mol: &Molecule, i: usize) -> i32 {
    let bonds: u32 = mol.neighbors(i).iter().map(|&(_, b)| mol.bond(b).kekule.as_int()).sum();
    (bonds + mol.atom(i).explicit_h as u32) as i32
}

fn unsaturations(mol: &Molecule, i: usize) -> i32 {
    explicit_valence(mol, i) - mol.degree(i) as i32 - mol.atom(i).explicit_h as i32
}

fn donor_type(mol: &Molecule, i: usize) -> Option<Donor> {
    let a = mol.atom(i);
    if !mol.ring_info().is_atom_in_ring(i) {
        return None;
    }
    if a.element > 18 && a.element != 34 && a.element != 52 {
        return None;
    }
    // hypervalent atoms are shut out: the valence may not exceed the lowest
    // one permitted for the element at this charge
    let base = *element::allowed_valences(a.element, a.charge).first()?;
    let valence = mol.total_valence(i);
    if valence > base as u32 {
        return None;
    }
    // radicals (bracket atoms short of a permitted valence) are excluded too
    if element::target_valence(a.element, a.charge, valence) != Some(valence) {
        return None;
    }
    let multiple: Vec<(usize, bool)> = mol
        .neighbors(i)
        .iter()
        .filter(|&&(_, b)| mol.bond(b).kekule.as_int() >= 2)
        .map(|&(n, b)| (n, mol.ring_info().is_bond_in_ring(b)))
        .collect();
    if unsaturations(mol, i) > 1 && multiple.len() > 1 {
        return None;
    }
    let exocyclic = multiple.iter().find(|m| !m.1).map(|m| m.0);
    let cyclic = multiple.iter().any(|m| m.1);
    let nelec = count_electrons(mol, i)?;
    match nelec {
        n if n < 0 => None,
        0 => {
            if exocyclic.is_some() {
                Some(Donor::Vacant)
            } else if cyclic {
                Some(Donor::One)
            } else {
                None
            }
        }
        1 => {
            if let Some(other) = exocyclic {
                if element::more_electronegative(mol.atom(other).element, a.element) {
                    Some(Donor::Vacant)
                } else {
                    Some(Donor::One)
                }
            } else if !multiple.is_empty() {
                Some(Donor::One)
            } else if a.charge == 1 {
                Some(Donor::Vacant)
            } else {
                None
            }
        }
        _ => {
            if multiple.is_empty() {
                Some(Donor::Two)
            } else {
                Some(Donor::One)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::chem::parse_smiles;

    fn aromatic_count(s: &str) -> usize {
        parse_smiles(s).unwrap().atoms().iter().filter(|a| a.aromatic).count()
    }

    #[test]
    fn heteroaromatics() {
        assert_eq!(aromatic_count("c1ccncc1"), 6);
        assert_eq!(aromatic_count("c1cc[nH]c1"), 5);
        assert_eq!(aromatic_count("c1ccoc1"), 5);
        assert_eq!(aromatic_count("c1ccsc1"), 5);
        assert_eq!(aromatic_count("O=c1cccc[nH]1"), 6);
        assert_eq!(aromatic_count("c1ccc2[nH]ccc2c1"), 9);
    }

    #[test]
    fn non_aromatic_rings() {
        assert_eq!(aromatic_count("C1=CCC=C1"), 0);
        assert_eq!(aromatic_count("C1=CC=CC=CC=C1"), 0);
        assert_eq!(aromatic_count("c1ccc1"), 0);
        assert_eq!(aromatic_count("C1CCCCC1"), 0);
    }

    #[test]
    fn fused_and_charged() {
        // azulene is aromatic only as a 10-electron union
        assert_eq!(aromatic_count("c1ccc2cccc2cc1"), 10);
        assert_eq!(aromatic_count("C1=CC=C2C=CC=CC=C12"), 10);
        assert_eq!(aromatic_count("c1cc[cH-]c1"), 5);
        assert_eq!(aromatic_count("c1cccc[cH+]c1"), 7);
        assert_eq!(aromatic_count("c1cc[nH+]cc1"), 6);
    }
}
