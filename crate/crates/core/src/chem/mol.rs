use serde::{Deserialize, Serialize};

use super::element;
use super::rings::RingInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    pub fn valence_contribution(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }

    /// Integer order; only meaningful for kekulé bonds.
    pub fn as_int(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: u8,
    pub charge: i8,
    pub isotope: Option<u16>,
    pub aromatic: bool,
    /// Written as a bracket atom: no implicit hydrogens are added.
    pub bracket: bool,
    pub explicit_h: u8,
    pub implicit_h: u8,
    pub chirality: Option<String>,
    pub atom_class: Option<u32>,
}

impl Atom {
    pub fn symbol(&self) -> &'static str {
        element::symbol(self.element)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
    /// One valid Kekulé assignment (never `Aromatic`).
    pub kekule: BondOrder,
    /// `/` or `\` as written; stored, not interpreted.
    pub stereo: Option<char>,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }
}

/// A molecular graph with hydrogens held as counts on heavy atoms.
///
/// Built by [`crate::chem::parse_smiles`]; every molecule carries a valid
/// Kekulé form, implicit hydrogen counts, SSSR rings and perceived
/// aromaticity.
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    rings: RingInfo,
}

impl Molecule {
    pub(crate) fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Self {
        let adjacency = build_adjacency(atoms.len(), &bonds);
        let pairs: Vec<(usize, usize)> = bonds.iter().map(|b| (b.begin, b.end)).collect();
        let rings = RingInfo::new(atoms.len(), &pairs);
        Molecule { atoms, bonds, adjacency, rings }
    }

    pub(crate) fn atoms_mut(&mut self) -> &mut [Atom] {
        &mut self.atoms
    }

    pub(crate) fn bonds_mut(&mut self) -> &mut [Bond] {
        &mut self.bonds
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    /// (neighbour atom, bond index) pairs.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|(_, bi)| *bi)
    }

    pub fn ring_info(&self) -> &RingInfo {
        &self.rings
    }

    /// Hydrogens on an atom: bracket and implicit counts plus explicit
    /// hydrogen neighbours.
    pub fn total_h(&self, atom: usize) -> u32 {
        let a = &self.atoms[atom];
        let neighbours = self.adjacency[atom].iter().filter(|(n, _)| self.atoms[*n].element == 1).count();
        a.explicit_h as u32 + a.implicit_h as u32 + neighbours as u32
    }

    /// Sum of Kekulé bond orders plus hydrogens.
    pub fn total_valence(&self, atom: usize) -> u32 {
        let a = &self.atoms[atom];
        let bonds: u32 = self.adjacency[atom].iter().map(|(_, b)| self.bonds[*b].kekule.as_int()).sum();
        bonds + a.explicit_h as u32 + a.implicit_h as u32
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element > 1).count()
    }

    /// Connected components as sorted atom lists, ordered by lowest atom.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for s in 0..self.atoms.len() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                for &(n, _) in &self.adjacency[comp[i]] {
                    if !seen[n] {
                        seen[n] = true;
                        comp.push(n);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Copy with every hydrogen turned into an explicit atom.
    pub fn with_explicit_hydrogens(&self) -> Molecule {
        let mut atoms = self.atoms.clone();
        let mut bonds = self.bonds.clone();
        for i in 0..self.atoms.len() {
            let n = self.atoms[i].explicit_h + self.atoms[i].implicit_h;
            for _ in 0..n {
                atoms.push(Atom {
                    element: 1,
                    charge: 0,
                    isotope: None,
                    aromatic: false,
                    bracket: true,
                    explicit_h: 0,
                    implicit_h: 0,
                    chirality: None,
                    atom_class: None,
                });
                bonds.push(Bond {
                    begin: i,
                    end: atoms.len() - 1,
                    order: BondOrder::Single,
                    kekule: BondOrder::Single,
                    stereo: None,
                });
            }
            atoms[i].explicit_h = 0;
            atoms[i].implicit_h = 0;
        }
        let adjacency = build_adjacency(atoms.len(), &bonds);
        let mut rings = self.rings.clone();
        rings.extend(atoms.len(), bonds.len());
        Molecule { atoms, bonds, adjacency, rings }
    }

    /// Hill-order molecular formula, e.g. `C2H6O`.
    pub fn formula(&self) -> String {
        let mut counts = std::collections::BTreeMap::<String, u32>::new();
        let mut h = 0u32;
        for a in &self.atoms {
            if a.element == 1 {
                h += 1;
            } else {
                *counts.entry(a.symbol().to_string()).or_default() += 1;
            }
            h += a.explicit_h as u32 + a.implicit_h as u32;
        }
        let mut out = String::new();
        let mut push = |sym: &str, n: u32| {
            if n > 0 {
                out.push_str(sym);
                if n > 1 {
                    out.push_str(&n.to_string());
                }
            }
        };
        if let Some(c) = counts.remove("C") {
            push("C", c);
            push("H", h);
            for (s, n) in &counts {
                push(s, *n);
            }
        } else {
            counts.insert("H".to_string(), h);
            for (s, n) in &counts {
                push(s, *n);
            }
        }
        out
    }
}

fn build_adjacency(n: usize, bonds: &[Bond]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n];
    for (i, b) in bonds.iter().enumerate() {
        adj[b.begin].push((b.end, i));
        adj[b.end].push((b.begin, i));
    }
    adj
}
