//! Canonical atom ranking and SMILES output.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::element;
use super::mol::{BondOrder, Molecule};

fn bond_code(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

/// Initial per-atom invariant used to seed rank refinement.
/// Ring membership enters as a flag only: per-atom SSSR counts depend on
/// which equally small rings the basis happened to pick (bicyclo[3.1.1]).
fn atom_invariant(mol: &Molecule, i: usize) -> (u8, u16, i8, u32, usize, bool, bool, u32) {
    let a = mol.atom(i);
    (
        a.element,
        a.isotope.unwrap_or(0),
        a.charge,
        mol.total_h(i),
        mol.degree(i),
        a.aromatic,
        mol.ring_info().is_atom_in_ring(i),
        a.atom_class.unwrap_or(0),
    )
}

/// Relabels `keys` by sorted order; equal keys share a class.
fn classes_from_keys<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect()
}

fn count_classes(c: &[usize]) -> usize {
    let mut s = c.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// Iterates neighbourhood refinement until the partition is stable.
pub(crate) fn refine(mol: &Molecule, mut classes: Vec<usize>) -> Vec<usize> {
    let mut n_classes = count_classes(&classes);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..mol.num_atoms())
            .map(|i| {
                let mut nb: Vec<(usize, u8)> =
                    mol.neighbors(i).iter().map(|&(n, b)| (classes[n], bond_code(mol.bond(b).order))).collect();
                nb.sort_unstable();
                (classes[i], nb)
            })
            .collect();
        let next = classes_from_keys(&keys);
        let n_next = count_classes(&next);
        classes = next;
        if n_next == n_classes {
            return classes;
        }
        n_classes = n_next;
    }
}

/// Canonical rank of every atom: a permutation of `0..n` that depends only
/// on the molecular graph, up to symmetry-equivalent atoms.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let n = mol.num_atoms();
    let inv: Vec<_> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    let mut classes = refine(mol, classes_from_keys(&inv));
    while count_classes(&classes) < n {
        // break the first tie on the lowest-indexed member, then refine again
        let mut counts = vec![0usize; n];
        for &c in &classes {
            counts[c] += 1;
        }
        let tied = (0..n).find(|&c| counts[c] > 1).unwrap();
        let pick = (0..n).find(|&i| classes[i] == tied).unwrap();
        let keys: Vec<(usize, u8)> =
            (0..n).map(|i| (classes[i], u8::from(classes[i] == tied && i != pick))).collect();
        classes = refine(mol, classes_from_keys(&keys));
    }
    classes
}

/// Canonical SMILES: depends only on the molecular graph, never on the
/// atom order of the input.
pub fn write_smiles(mol: &Molecule) -> String {
    write_with_ranks(mol, &canonical_ranks(mol))
}

/// A valid, randomly ordered SMILES for the molecule (random root and
/// neighbour order per component). Parsing it yields an isomorphic graph.
pub fn random_smiles(mol: &Molecule, seed: u64) -> String {
    let mut ranks: Vec<usize> = (0..mol.num_atoms()).collect();
    ranks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    write_with_ranks(mol, &ranks)
}

/// DFS writer: starts each component at its lowest-ranked atom and visits
/// neighbours in rank order.
pub fn write_with_ranks(mol: &Molecule, rank: &[usize]) -> String {
    let n = mol.num_atoms();
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut ring_bonds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut used_bond = vec![false; mol.num_bonds()];
    let mut roots: Vec<usize> = Vec::new();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| rank[i]);
    for &start in &order {
        if visited[start] {
            continue;
        }
        roots.push(start);
        // iterative DFS keeping explicit neighbour cursors
        visited[start] = true;
        let mut stack: Vec<(usize, Vec<(usize, usize)>, usize)> = vec![(start, sorted_neighbors(mol, start, rank), 0)];
        while let Some(top) = stack.last_mut() {
            let (v, cursor) = (top.0, top.2);
            if cursor == top.1.len() {
                stack.pop();
                continue;
            }
            let (w, b) = top.1[cursor];
            top.2 += 1;
            if used_bond[b] {
                continue;
            }
            used_bond[b] = true;
            if visited[w] {
                ring_bonds[v].push(b);
                ring_bonds[w].push(b);
            } else {
                visited[w] = true;
                children[v].push((w, b));
                let nb = sorted_neighbors(mol, w, rank);
                stack.push((w, nb, 0));
            }
        }
    }

    let mut out = String::new();
    let mut digit_of_bond: Vec<Option<usize>> = vec![None; mol.num_bonds()];
    let mut digits_in_use: Vec<bool> = vec![false; 100];
    for (ci, &root) in roots.iter().enumerate() {
        if ci > 0 {
            out.push('.');
        }
        // (atom, incoming bond, close paren after subtree)
        let mut stack: Vec<Frame> = vec![Frame::Atom(root, None)];
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Close => out.push(')'),
                Frame::Atom(v, via) => {
                    if let Some(b) = via {
                        out.push_str(bond_symbol(mol, b));
                    }
                    out.push_str(&atom_text(mol, v));
                    let mut freed = Vec::new();
                    let mut rb = ring_bonds[v].clone();
                    // close open rings first, then open new ones by partner rank
                    rb.sort_by_key(|&b| (digit_of_bond[b].is_none(), digit_of_bond[b], rank[mol.bond(b).other(v)]));
                    for b in rb {
                        match digit_of_bond[b] {
                            Some(d) => {
                                push_digit(&mut out, d);
                                freed.push(d);
                            }
                            None => {
                                let d = (1..100).find(|&d| !digits_in_use[d]).expect("too many open rings");
                                digits_in_use[d] = true;
                                digit_of_bond[b] = Some(d);
                                out.push_str(bond_symbol(mol, b));
                                push_digit(&mut out, d);
                            }
                        }
                    }
                    for d in freed {
                        digits_in_use[d] = false;
                    }
                    let kids = &children[v];
                    // pushed in reverse so the first child is written first
                    for (k, &(w, b)) in kids.iter().enumerate().rev() {
                        if k + 1 == kids.len() {
                            stack.push(Frame::Atom(w, Some(b)));
                        } else {
                            stack.push(Frame::Close);
                            stack.push(Frame::Atom(w, Some(b)));
                            stack.push(Frame::Open);
                        }
                    }
                }
                Frame::Open => out.push('('),
            }
        }
    }
    out
}

enum Frame {
    Atom(usize, Option<usize>),
    Open,
    Close,
}

fn sorted_neighbors(mol: &Molecule, v: usize, rank: &[usize]) -> Vec<(usize, usize)> {
    let mut nb = mol.neighbors(v).to_vec();
    nb.sort_by_key(|&(w, _)| rank[w]);
    nb
}

fn push_digit(out: &mut String, d: usize) {
    if d < 10 {
        out.push_str(&d.to_string());
    } else {
        out.push_str(&format!("%{d}"));
    }
}

fn bond_symbol(mol: &Molecule, b: usize) -> &'static str {
    let bond = mol.bond(b);
    match bond.order {
        BondOrder::Single => {
            if mol.atom(bond.begin).aromatic && mol.atom(bond.end).aromatic {
                "-"
            } else {
                ""
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => "",
    }
}

/// Hydrogens a parser would assign to the atom if written without brackets.
fn bare_hydrogens(mol: &Molecule, i: usize) -> Option<u32> {
    let a = mol.atom(i);
    let used: u32 = mol
        .neighbors(i)
        .iter()
        .map(|&(_, b)| match mol.bond(b).order {
            BondOrder::Aromatic => 1,
            o => o.as_int(),
        })
        .sum();
    let target = element::target_valence(a.element, 0, used)?;
    let spare = target - used;
    if a.aromatic && spare > 0 {
        // one unit goes into the Kekulé double bond
        Some(spare - 1)
    } else {
        Some(spare)
    }
}

fn atom_text(mol: &Molecule, i: usize) -> String {
    let a = mol.atom(i);
    let sym = element::symbol(a.element);
    let sym = if a.aromatic { sym.to_ascii_lowercase() } else { sym.to_string() };
    let h = a.explicit_h as u32 + a.implicit_h as u32;
    let bare_ok = element::is_organic_subset(a.element)
        && a.charge == 0
        && a.isotope.is_none()
        && a.atom_class.is_none()
        && (!a.aromatic || matches!(a.element, 5 | 6 | 7 | 8 | 15 | 16))
        && bare_hydrogens(mol, i) == Some(h);
    if bare_ok {
        return sym;
    }
    let mut s = String::from("[");
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&sym);
    if h > 0 {
        s.push('H');
        if h > 1 {
            s.push_str(&h.to_string());
        }
    }
    match a.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    if let Some(c) = a.atom_class {
        s.push_str(&format!(":{c}"));
    }
    s.push(']');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn canon(s: &str) -> String {
        write_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn same_molecule_same_string() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C1=CC=CC=C1O"), canon("Oc1ccccc1"));
        assert_eq!(canon("c1ccc2ccccc2c1"), canon("C1=CC2=CC=CC=C2C=C1"));
        assert_eq!(canon("[NH3+]CC([O-])=O"), canon("OC(=O)C[NH3+]".replace("OC(=O)", "[O-]C(=O)").as_str()));
    }

    #[test]
    fn output_reparses() {
        for s in ["c1cc[nH]c1", "CC(=O)Nc1ccc(O)cc1", "c1ccccc1-c1ccccc1", "[13CH4]", "C[N+](C)(C)C.[Cl-]", "O=c1cccc[nH]1"] {
            let m = parse_smiles(s).unwrap();
            let out = write_smiles(&m);
            let back = parse_smiles(&out).unwrap_or_else(|e| panic!("{s} -> {out}: {e}"));
            assert_eq!(write_smiles(&back), out);
            assert_eq!(back.formula(), m.formula());
        }
    }

    #[test]
    fn pyrrole_keeps_bracket_hydrogen() {
        assert!(canon("c1cc[nH]c1").contains("[nH]"));
        assert!(!canon("c1ccncc1").contains('['));
    }
}
