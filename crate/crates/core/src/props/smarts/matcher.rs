use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::chem::{BondOrder, Molecule};

use super::parse::{AtomPrim, BondPrim, Expr, Pattern};

/// One matching session over a molecule. Recursive sub-patterns are
/// evaluated once per session and cached by address.
pub(crate) struct Session<'m> {
    mol: &'m Molecule,
    recursive: RefCell<HashMap<usize, Vec<bool>>>,
    domains: RefCell<HashMap<usize, Rc<Vec<Vec<bool>>>>>,
}

/// Search plan: for pattern atom k, the earlier atom it hangs from (if any)
/// and every bond back to already-placed atoms.
struct Plan {
    parent: Vec<Option<(usize, usize)>>,
    back: Vec<Vec<(usize, usize)>>,
}

impl Plan {
    fn new(p: &Pattern) -> Self {
        let n = p.atoms.len();
        let mut parent = vec![None; n];
        let mut back = vec![Vec::new(); n];
        for (bi, b) in p.bonds.iter().enumerate() {
            let (lo, hi) = if b.a < b.b { (b.a, b.b) } else { (b.b, b.a) };
            back[hi].push((lo, bi));
            if parent[hi].is_none() {
                parent[hi] = Some((lo, bi));
            }
        }
        Plan { parent, back }
    }
}

impl<'m> Session<'m> {
    pub(crate) fn new(mol: &'m Molecule) -> Self {
        Session { mol, recursive: RefCell::new(HashMap::new()), domains: RefCell::new(HashMap::new()) }
    }

    /// Per pattern atom, the molecule atoms satisfying its atom expression.
    fn domains(&self, p: &Pattern) -> Rc<Vec<Vec<bool>>> {
        let key = p as *const Pattern as usize;
        if let Some(d) = self.domains.borrow().get(&key) {
            return Rc::clone(d);
        }
        let d: Vec<Vec<bool>> = p
            .atoms
            .iter()
            .map(|e| (0..self.mol.num_atoms()).map(|i| self.atom_matches(e, i)).collect())
            .collect();
        let d = Rc::new(d);
        self.domains.borrow_mut().insert(key, Rc::clone(&d));
        d
    }

    /// Every embedding (pattern atom k -> molecule atom), automorphic
    /// duplicates included. `visit` returns false to stop early.
    fn search(&self, p: &Pattern, root: Option<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) {
        let n_mol = self.mol.num_atoms();
        if p.atoms.len() > n_mol {
            return;
        }
        let dom = self.domains(p);
        if let Some(r) = root {
            if !dom[0][r] {
                return;
            }
        }
        let plan = Plan::new(p);
        let mut mapping = vec![usize::MAX; p.atoms.len()];
        let mut used = vec![false; n_mol];
        self.extend(p, &plan, &dom, 0, root, &mut mapping, &mut used, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        p: &Pattern,
        plan: &Plan,
        dom: &[Vec<bool>],
        k: usize,
        root: Option<usize>,
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if k == p.atoms.len() {
            return visit(mapping);
        }
        let candidates: Vec<usize> = match (k, root, plan.parent[k]) {
            (0, Some(r), _) => vec![r],
            (_, _, Some((parent, _))) => self.mol.neighbors(mapping[parent]).iter().map(|&(n, _)| n).collect(),
            _ => (0..self.mol.num_atoms()).collect(),
        };
        for t in candidates {
            if used[t] || !dom[k][t] {
                continue;
            }
            let bonds_ok = plan.back[k].iter().all(|&(other, bi)| match self.mol.bond_between(mapping[other], t) {
                Some(mb) => self.bond_matches(&p.bonds[bi].expr, mb),
                None => false,
            });
            if !bonds_ok {
                continue;
            }
            mapping[k] = t;
            used[t] = true;
            let go_on = self.extend(p, plan, dom, k + 1, root, mapping, used, visit);
            used[t] = false;
            mapping[k] = usize::MAX;
            if !go_on {
                return false;
            }
        }
        true
    }

    /// Matches deduplicated by the set of molecule atoms they cover.
    pub(crate) fn unique_matches(&self, p: &Pattern) -> Vec<Vec<usize>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.search(p, None, &mut |m| {
            let mut key = m.to_vec();
            key.sort_unstable();
            if seen.insert(key) {
                out.push(m.to_vec());
            }
            true
        });
        out
    }

    pub(crate) fn has_match(&self, p: &Pattern) -> bool {
        let mut found = false;
        self.search(p, None, &mut |_| {
            found = true;
            false
        });
        found
    }

    /// Whether some embedding puts pattern atom 0 on `atom`.
    pub(crate) fn matches_at(&self, p: &Pattern, atom: usize) -> bool {
        let mut found = false;
        self.search(p, Some(atom), &mut |_| {
            found = true;
            false
        });
        found
    }

    /// For each molecule atom, whether some embedding puts pattern atom 0 there.
    pub(crate) fn root_matches(&self, p: &Pattern) -> Vec<bool> {
        let key = p as *const Pattern as usize;
        if let Some(v) = self.recursive.borrow().get(&key) {
            return v.clone();
        }
        let out: Vec<bool> = (0..self.mol.num_atoms()).map(|a| self.matches_at(p, a)).collect();
        self.recursive.borrow_mut().insert(key, out.clone());
        out
    }

    fn atom_matches(&self, e: &Expr<AtomPrim>, i: usize) -> bool {
        match e {
            Expr::Prim(p) => self.atom_prim(p, i),
            Expr::Not(inner) => !self.atom_matches(inner, i),
            Expr::And(v) => v.iter().all(|x| self.atom_matches(x, i)),
            Expr::Or(v) => v.iter().any(|x| self.atom_matches(x, i)),
        }
    }

    fn atom_prim(&self, p: &AtomPrim, i: usize) -> bool {
        let mol = self.mol;
        let a = mol.atom(i);
        let rings = mol.ring_info();
        match p {
            AtomPrim::Any => true,
            AtomPrim::Aliphatic => !a.aromatic,
            AtomPrim::Aromatic => a.aromatic,
            AtomPrim::Element { z, aromatic } => a.element == *z && aromatic.is_none_or(|ar| ar == a.aromatic),
            AtomPrim::Isotope(n) => a.isotope == Some(*n),
            AtomPrim::TotalH(n) => mol.total_h(i) == *n,
            AtomPrim::ImplicitH(n) => {
                let h = (a.explicit_h + a.implicit_h) as u32;
                n.map_or(h > 0, |n| h == n)
            }
            AtomPrim::Degree(n) => mol.degree(i) as u32 == *n,
            AtomPrim::Connectivity(n) => (mol.degree(i) + (a.explicit_h + a.implicit_h) as usize) as u32 == *n,
            AtomPrim::Valence(n) => mol.total_valence(i) == *n,
            AtomPrim::RingCount(n) => match n {
                None => rings.is_atom_in_ring(i),
                Some(n) => rings.atom_ring_count(i) as u32 == *n,
            },
            AtomPrim::RingSize(n) => match n {
                None => rings.is_atom_in_ring(i),
                Some(n) => rings.min_atom_ring_size(i) == Some(*n as usize),
            },
            AtomPrim::RingConnectivity(n) => {
                let c = mol.neighbors(i).iter().filter(|(_, b)| rings.is_bond_in_ring(*b)).count() as u32;
                n.map_or(c > 0, |n| c == n)
            }
            AtomPrim::Charge(c) => a.charge as i32 == *c,
            AtomPrim::Recursive(p) => self.root_matches(p)[i],
        }
    }

    fn bond_matches(&self, e: &Expr<BondPrim>, b: usize) -> bool {
        match e {
            Expr::Prim(p) => {
                let order = self.mol.bond(b).order;
                match p {
                    BondPrim::Implicit => matches!(order, BondOrder::Single | BondOrder::Aromatic),
                    BondPrim::Any => true,
                    BondPrim::Single => order == BondOrder::Single,
                    BondPrim::Double => order == BondOrder::Double,
                    BondPrim::Triple => order == BondOrder::Triple,
                    BondPrim::Aromatic => order == BondOrder::Aromatic,
                    BondPrim::Ring => self.mol.ring_info().is_bond_in_ring(b),
                }
            }
            Expr::Not(inner) => !self.bond_matches(inner, b),
            Expr::And(v) => v.iter().all(|x| self.bond_matches(x, b)),
            Expr::Or(v) => v.iter().any(|x| self.bond_matches(x, b)),
        }
    }
}
