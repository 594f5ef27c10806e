//! Exact graph isomorphism between molecules, used to check that written
//! SMILES describe the same structure as the input.

use super::mol::{BondOrder, Molecule};

fn label(mol: &Molecule, i: usize) -> (u8, i8, u16, u32, bool, usize) {
    let a = mol.atom(i);
    (a.element, a.charge, a.isotope.unwrap_or(0), mol.total_h(i), a.aromatic, mol.degree(i))
}

/// True when an atom bijection preserves element, charge, isotope,
/// hydrogen count, aromaticity and every bond order.
pub fn are_isomorphic(a: &Molecule, b: &Molecule) -> bool {
    let n = a.num_atoms();
    if n != b.num_atoms() || a.num_bonds() != b.num_bonds() {
        return false;
    }
    // colour refinement on the disjoint union keeps colours comparable
    let la: Vec<_> = (0..n).map(|i| label(a, i)).collect();
    let lb: Vec<_> = (0..n).map(|i| label(b, i)).collect();
    let mut all: Vec<_> = la.iter().chain(lb.iter()).cloned().collect();
    all.sort();
    all.dedup();
    let mut colour: Vec<usize> = la.iter().chain(lb.iter()).map(|l| all.binary_search(l).unwrap()).collect();
    let nbrs = |m: &Molecule, i: usize| -> Vec<(usize, BondOrder)> {
        m.neighbors(i).iter().map(|&(w, bi)| (w, m.bond(bi).order)).collect()
    };
    loop {
        let keys: Vec<(usize, Vec<(usize, BondOrder)>)> = (0..2 * n)
            .map(|k| {
                let (m, i, off) = if k < n { (a, k, 0) } else { (b, k - n, n) };
                let mut nb: Vec<(usize, BondOrder)> = nbrs(m, i).into_iter().map(|(w, o)| (colour[w + off], o)).collect();
                nb.sort();
                (colour[k], nb)
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        let next: Vec<usize> = keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect();
        let stable = sorted.len() == {
            let mut c = colour.clone();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        colour = next;
        if stable {
            break;
        }
    }
    let mut ca: Vec<usize> = colour[..n].to_vec();
    let mut cb: Vec<usize> = colour[n..].to_vec();
    ca.sort_unstable();
    cb.sort_unstable();
    if ca != cb {
        return false;
    }
    // match atoms of `a` in BFS order so each has a mapped neighbour early
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        order.push(s);
        let mut k = order.len() - 1;
        while k < order.len() {
            for &(w, _) in a.neighbors(order[k]) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
            k += 1;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend(a, b, &colour, &order, 0, &mut map, &mut used)
}

fn extend(a: &Molecule, b: &Molecule, colour: &[usize], order: &[usize], depth: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    let n = a.num_atoms();
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    for w in 0..n {
        if used[w] || colour[v] != colour[w + n] {
            continue;
        }
        let consistent = a.neighbors(v).iter().all(|&(u, bi)| {
            map[u] == usize::MAX || b.bond_between(w, map[u]).is_some_and(|bj| b.bond(bj).order == a.bond(bi).order)
        });
        if !consistent {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend(a, b, colour, order, depth + 1, map, used) {
            return true;
        }
        map[v] = usize::MAX;
        used[w] = false;
    }
    false
}
