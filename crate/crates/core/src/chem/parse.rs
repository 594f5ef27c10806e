//! SMILES to molecular graph.

use std::collections::BTreeMap;

use super::aromatic::perceive_aromaticity;
use super::element;
use super::error::ChemError;
use super::mol::{Atom, Bond, BondOrder, Molecule};
use super::rings::RingInfo;
use super::token::{tokenize_smiles, BondSymbol, TokenKind};

/// Parses a SMILES string into a sanitized molecule.
///
/// Lowercase atoms are kekulized, implicit hydrogens are assigned from the
/// element valence model, and aromaticity is then perceived from scratch, so
/// the resulting flags do not depend on how the input was written.
pub fn parse_smiles(smiles: &str) -> Result<Molecule, ChemError> {
    let tokens = tokenize_smiles(smiles)?;
    if tokens.is_empty() {
        return Err(ChemError::Empty);
    }
    let (atoms, raw) = build_graph(&tokens)?;
    let (mut atoms, raw) = merge_plain_hydrogens(atoms, raw);

    let pairs: Vec<(usize, usize)> = raw.iter().map(|b| (b.begin, b.end)).collect();
    let rings = RingInfo::new(atoms.len(), &pairs);
    let mut bonds: Vec<Bond> = raw
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let order = match r.symbol {
                None if atoms[r.begin].aromatic && atoms[r.end].aromatic => BondOrder::Aromatic,
                None | Some(BondSymbol::Single | BondSymbol::Up | BondSymbol::Down) => BondOrder::Single,
                Some(BondSymbol::Double) => BondOrder::Double,
                Some(BondSymbol::Triple) => BondOrder::Triple,
                Some(BondSymbol::Aromatic) => BondOrder::Aromatic,
            };
            // aromatic bonds only exist inside rings
            let order = if order == BondOrder::Aromatic && !rings.is_bond_in_ring(i) { BondOrder::Single } else { order };
            let stereo = match r.symbol {
                Some(BondSymbol::Up) => Some('/'),
                Some(BondSymbol::Down) => Some('\\'),
                _ => None,
            };
            Bond { begin: r.begin, end: r.end, order, kekule: order, stereo }
        })
        .collect();
    for b in &bonds {
        if b.order == BondOrder::Aromatic {
            atoms[b.begin].aromatic = true;
            atoms[b.end].aromatic = true;
        }
    }
    for (i, a) in atoms.iter().enumerate() {
        if a.aromatic && !rings.is_atom_in_ring(i) {
            return Err(ChemError::AromaticPerceptionError { atom: i, reason: "aromatic atom outside any ring".into() });
        }
    }

    kekulize(&atoms, &mut bonds)?;
    assign_hydrogens(&mut atoms, &bonds)?;

    let mut mol = Molecule::from_parts(atoms, bonds);
    perceive_aromaticity(&mut mol);
    Ok(mol)
}

struct RawBond {
    begin: usize,
    end: usize,
    symbol: Option<BondSymbol>,
}

fn build_graph(tokens: &[super::token::Token]) -> Result<(Vec<Atom>, Vec<RawBond>), ChemError> {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<RawBond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondSymbol, usize)> = None;
    // (atom before the branch, position of '(', atom count at open)
    let mut branches: Vec<(usize, usize, usize)> = Vec::new();
    let mut open_rings: BTreeMap<u32, (usize, Option<BondSymbol>, usize)> = BTreeMap::new();
    let unexpected = |t: &super::token::Token| ChemError::UnexpectedToken { position: t.position, found: format!("{:?}", t.text) };

    let mut last: Option<&TokenKind> = None;
    for t in tokens {
        let before = last.replace(&t.kind);
        match &t.kind {
            TokenKind::Atom(spec) => {
                let idx = atoms.len();
                atoms.push(Atom {
                    element: spec.element,
                    charge: spec.charge,
                    isotope: spec.isotope,
                    aromatic: spec.aromatic,
                    bracket: spec.bracket,
                    explicit_h: spec.hcount,
                    implicit_h: 0,
                    chirality: spec.chirality.clone(),
                    atom_class: spec.atom_class,
                });
                match prev {
                    Some(p) => bonds.push(RawBond { begin: p, end: idx, symbol: pending.take().map(|x| x.0) }),
                    None if pending.is_some() => return Err(unexpected(t)),
                    None => {}
                }
                prev = Some(idx);
            }
            TokenKind::Bond(sym) => {
                if prev.is_none() || pending.is_some() {
                    return Err(unexpected(t));
                }
                pending = Some((*sym, t.position));
            }
            TokenKind::RingClosure(label) => {
                let Some(cur) = prev else { return Err(unexpected(t)) };
                let sym = pending.take().map(|x| x.0);
                if let Some((other, other_sym, _)) = open_rings.remove(label) {
                    let bad = |reason: &str| ChemError::InvalidRingBond { label: *label, position: t.position, reason: reason.into() };
                    if other == cur {
                        return Err(bad("ring bond closes on its own atom"));
                    }
                    if bonds.iter().any(|b| (b.begin == other && b.end == cur) || (b.begin == cur && b.end == other)) {
                        return Err(bad("duplicate bond"));
                    }
                    let symbol = match (other_sym, sym) {
                        (Some(a), Some(b)) if a != b => return Err(bad("conflicting bond symbols")),
                        (a, b) => a.or(b),
                    };
                    bonds.push(RawBond { begin: other, end: cur, symbol });
                } else {
                    open_rings.insert(*label, (cur, sym, t.position));
                }
            }
            TokenKind::BranchOpen => {
                let Some(cur) = prev else { return Err(unexpected(t)) };
                // "((" opens a branch that holds no atom of its own
                if pending.is_some() || matches!(before, Some(TokenKind::BranchOpen)) {
                    return Err(unexpected(t));
                }
                branches.push((cur, t.position, atoms.len()));
            }
            TokenKind::BranchClose => {
                let Some((atom, _, count)) = branches.pop() else {
                    return Err(ChemError::UnmatchedParenthesis { position: t.position });
                };
                if pending.is_some() || atoms.len() == count {
                    return Err(unexpected(t));
                }
                prev = Some(atom);
            }
            TokenKind::Dot => {
                if prev.is_none() || pending.is_some() {
                    return Err(unexpected(t));
                }
                prev = None;
            }
        }
    }
    if let Some((_, pos)) = pending {
        return Err(ChemError::UnexpectedToken { position: pos, found: "bond at end of input".into() });
    }
    if let Some(t) = tokens.last().filter(|t| matches!(t.kind, TokenKind::Dot)) {
        return Err(ChemError::UnexpectedToken { position: t.position, found: "'.' at end of input".into() });
    }
    if let Some(&(_, pos, _)) = branches.last() {
        return Err(ChemError::UnmatchedParenthesis { position: pos });
    }
    if let Some((&label, &(_, _, position))) = open_rings.iter().next() {
        return Err(ChemError::UnclosedRing { label, position });
    }
    Ok((atoms, bonds))
}

/// Folds `[H]` atoms hanging off a heavy atom into that atom's hydrogen
/// count. Isotopic, charged or bridging hydrogens stay in the graph.
fn merge_plain_hydrogens(mut atoms: Vec<Atom>, bonds: Vec<RawBond>) -> (Vec<Atom>, Vec<RawBond>) {
    let mut degree = vec![0usize; atoms.len()];
    for b in &bonds {
        degree[b.begin] += 1;
        degree[b.end] += 1;
    }
    let plain = |a: &Atom| a.element == 1 && a.isotope.is_none() && a.charge == 0 && a.explicit_h == 0 && a.atom_class.is_none();
    let mut drop = vec![false; atoms.len()];
    for b in &bonds {
        if !matches!(b.symbol, None | Some(BondSymbol::Single)) {
            continue;
        }
        for (h, heavy) in [(b.begin, b.end), (b.end, b.begin)] {
            if plain(&atoms[h]) && degree[h] == 1 && atoms[heavy].element != 1 && !drop[h] {
                drop[h] = true;
                atoms[heavy].explicit_h += 1;
            }
        }
    }
    if !drop.iter().any(|&d| d) {
        return (atoms, bonds);
    }
    let mut new_index = vec![usize::MAX; atoms.len()];
    let mut kept = Vec::new();
    for (i, a) in atoms.into_iter().enumerate() {
        if !drop[i] {
            new_index[i] = kept.len();
            kept.push(a);
        }
    }
    let bonds = bonds
        .into_iter()
        .filter(|b| !drop[b.begin] && !drop[b.end])
        .map(|b| RawBond { begin: new_index[b.begin], end: new_index[b.end], symbol: b.symbol })
        .collect();
    (kept, bonds)
}

/// Assigns single/double orders to aromatic bonds so that every aromatic
/// atom short of its valence gets exactly one double bond.
fn kekulize(atoms: &[Atom], bonds: &mut [Bond]) -> Result<(), ChemError> {
    let n = atoms.len();
    let mut used = vec![0u32; n];
    let mut has_arom = vec![false; n];
    for b in bonds.iter() {
        for &a in &[b.begin, b.end] {
            used[a] += b.order.as_int();
            if b.order == BondOrder::Aromatic {
                has_arom[a] = true;
            }
        }
    }
    let mut need = vec![false; n];
    for i in 0..n {
        if !has_arom[i] {
            continue;
        }
        let a = &atoms[i];
        let v = used[i] + a.explicit_h as u32;
        if element::allowed_valences(a.element, a.charge).is_empty() {
            continue;
        }
        match element::target_valence(a.element, a.charge, v) {
            Some(t) => need[i] = t > v,
            None => {
                return Err(ChemError::ValenceError { atom: i, symbol: a.symbol().to_string(), valence: v });
            }
        }
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (bi, b) in bonds.iter().enumerate() {
        if b.order == BondOrder::Aromatic && need[b.begin] && need[b.end] {
            adj[b.begin].push((b.end, bi));
            adj[b.end].push((b.begin, bi));
        }
    }
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let mut budget = 1_000_000usize;
    if !match_all(&need, &adj, &mut mate, &mut budget) {
        let atom = (0..n).find(|&i| need[i] && mate[i].is_none()).unwrap_or(0);
        return Err(ChemError::AromaticPerceptionError { atom, reason: "cannot kekulize aromatic system".into() });
    }
    for b in bonds.iter_mut() {
        if b.order == BondOrder::Aromatic {
            b.kekule = BondOrder::Single;
        }
    }
    for i in 0..n {
        if let Some(bi) = mate[i] {
            bonds[bi].kekule = BondOrder::Double;
        }
    }
    Ok(())
}

/// Backtracking perfect matching over the atoms that need a double bond,
/// always extending the unmatched atom with the fewest free partners.
fn match_all(need: &[bool], adj: &[Vec<(usize, usize)>], mate: &mut [Option<usize>], budget: &mut usize) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let mut best: Option<(usize, usize)> = None;
    for i in 0..need.len() {
        if !need[i] || mate[i].is_some() {
            continue;
        }
        let free = adj[i].iter().filter(|(n, _)| mate[*n].is_none()).count();
        if free == 0 {
            return false;
        }
        if best.is_none_or(|(_, f)| free < f) {
            best = Some((i, free));
        }
    }
    let Some((i, _)) = best else { return true };
    for &(n, bi) in &adj[i] {
        if mate[n].is_some() {
            continue;
        }
        mate[i] = Some(bi);
        mate[n] = Some(bi);
        if match_all(need, adj, mate, budget) {
            return true;
        }
        mate[i] = None;
        mate[n] = None;
    }
    false
}

fn assign_hydrogens(atoms: &mut [Atom], bonds: &[Bond]) -> Result<(), ChemError> {
    let mut valence = vec![0u32; atoms.len()];
    for b in bonds {
        valence[b.begin] += b.kekule.as_int();
        valence[b.end] += b.kekule.as_int();
    }
    for (i, a) in atoms.iter_mut().enumerate() {
        let v = valence[i] + a.explicit_h as u32;
        let allowed = element::allowed_valences(a.element, a.charge);
        let err = || ChemError::ValenceError { atom: i, symbol: a.symbol().to_string(), valence: v };
        if a.bracket {
            if allowed.last().is_some_and(|&max| v > max as u32) {
                return Err(err());
            }
        } else {
            match element::target_valence(a.element, a.charge, v) {
                Some(t) => a.implicit_h = (t - v) as u8,
                None => return Err(err()),
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(s: &str) -> Vec<u32> {
        let m = parse_smiles(s).unwrap();
        (0..m.num_atoms()).map(|i| m.total_h(i)).collect()
    }

    #[test]
    fn implicit_hydrogens() {
        assert_eq!(hs("CCO"), vec![3, 2, 1]);
        assert_eq!(hs("C=O"), vec![2, 0]);
        assert_eq!(hs("c1ccccc1"), vec![1; 6]);
        assert_eq!(hs("c1cc[nH]c1"), vec![1, 1, 1, 1, 1]);
        assert_eq!(hs("[NH4+]"), vec![4]);
        assert_eq!(hs("CS(=O)(=O)C"), vec![3, 0, 0, 0, 3]);
        assert_eq!(hs("C[N+](C)(C)C"), vec![3, 0, 3, 3, 3]);
    }

    #[test]
    fn benzene_is_aromatic() {
        let m = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(m.num_atoms(), 6);
        assert_eq!(m.num_bonds(), 6);
        assert!(m.atoms().iter().all(|a| a.aromatic));
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        let doubles = m.bonds().iter().filter(|b| b.kekule == BondOrder::Double).count();
        assert_eq!(doubles, 3);
        // kekulé input perceives the same way
        let k = parse_smiles("C1=CC=CC=C1").unwrap();
        assert!(k.atoms().iter().all(|a| a.aromatic));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_smiles("C1CC"), Err(ChemError::UnclosedRing { label: 1, .. })));
        assert!(matches!(parse_smiles("CC(C"), Err(ChemError::UnmatchedParenthesis { .. })));
        assert!(matches!(parse_smiles("CC)C"), Err(ChemError::UnmatchedParenthesis { .. })));
        assert!(matches!(parse_smiles("C$C"), Err(ChemError::IllegalCharacter { position: 1, ch: '$' })));
        assert!(matches!(parse_smiles("CC="), Err(ChemError::UnexpectedToken { .. })));
        assert!(matches!(parse_smiles("C((C))"), Err(ChemError::UnexpectedToken { .. })));
        assert!(matches!(parse_smiles("C."), Err(ChemError::UnexpectedToken { .. })));
        assert!(matches!(parse_smiles("C11"), Err(ChemError::InvalidRingBond { .. })));
        assert!(matches!(parse_smiles(""), Err(ChemError::Empty)));
    }

    #[test]
    fn valence_errors() {
        assert!(matches!(parse_smiles("C(C)(C)(C)(C)C"), Err(ChemError::ValenceError { atom: 0, .. })));
        assert!(matches!(parse_smiles("N(=O)=O"), Err(ChemError::ValenceError { .. })));
        assert!(matches!(parse_smiles("[NH4]"), Err(ChemError::ValenceError { .. })));
        assert!(parse_smiles("[N+](=O)([O-])C").is_ok());
    }

    #[test]
    fn aromatic_errors() {
        assert!(matches!(parse_smiles("c1cccc1"), Err(ChemError::AromaticPerceptionError { .. })));
        assert!(matches!(parse_smiles("Cc"), Err(ChemError::AromaticPerceptionError { atom: 1, .. })));
    }

    #[test]
    fn biphenyl_link_is_single() {
        let m = parse_smiles("c1ccccc1c1ccccc1").unwrap();
        let link = m.bond_between(5, 6).unwrap();
        assert_eq!(m.bond(link).order, BondOrder::Single);
    }
}
