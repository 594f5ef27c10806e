//! Smallest set of smallest rings.
//!
//! Candidate cycles are built Horton-style from one shortest-path tree per
//! root atom; a minimum cycle basis is then picked greedily by length with
//! GF(2) elimination over bond-incidence vectors.

use std::collections::{HashSet, VecDeque};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RingInfo {
    rings: Vec<Vec<usize>>,
    ring_bonds: Vec<Vec<usize>>,
    atom_rings: Vec<Vec<usize>>,
    bond_rings: Vec<Vec<usize>>,
}

impl RingInfo {
    pub(crate) fn new(n_atoms: usize, bonds: &[(usize, usize)]) -> Self {
        let found = sssr(n_atoms, bonds);
        let mut atom_rings = vec![Vec::new(); n_atoms];
        let mut bond_rings = vec![Vec::new(); bonds.len()];
        let mut rings = Vec::new();
        let mut ring_bonds = Vec::new();
        for (ri, (atoms, rb)) in found.into_iter().enumerate() {
            for &a in &atoms {
                atom_rings[a].push(ri);
            }
            for &b in &rb {
                bond_rings[b].push(ri);
            }
            rings.push(atoms);
            ring_bonds.push(rb);
        }
        RingInfo { rings, ring_bonds, atom_rings, bond_rings }
    }

    /// Atom indices of each ring, in cyclic order.
    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn ring_bonds(&self) -> &[Vec<usize>] {
        &self.ring_bonds
    }

    pub fn num_rings(&self) -> usize {
        self.rings.len()
    }

    pub fn atom_ring_count(&self, atom: usize) -> usize {
        self.atom_rings[atom].len()
    }

    pub fn atom_rings(&self, atom: usize) -> &[usize] {
        &self.atom_rings[atom]
    }

    pub fn bond_ring_count(&self, bond: usize) -> usize {
        self.bond_rings[bond].len()
    }

    pub fn is_atom_in_ring(&self, atom: usize) -> bool {
        !self.atom_rings[atom].is_empty()
    }

    pub fn is_bond_in_ring(&self, bond: usize) -> bool {
        !self.bond_rings[bond].is_empty()
    }

    pub fn min_atom_ring_size(&self, atom: usize) -> Option<usize> {
        self.atom_rings[atom].iter().map(|&r| self.rings[r].len()).min()
    }

    pub fn atom_in_ring_of_size(&self, atom: usize, size: usize) -> bool {
        self.atom_rings[atom].iter().any(|&r| self.rings[r].len() == size)
    }

    /// Extends the per-atom tables for atoms appended after ring perception
    /// (explicit hydrogens never sit in rings).
    pub(crate) fn extend(&mut self, n_atoms: usize, n_bonds: usize) {
        self.atom_rings.resize(n_atoms, Vec::new());
        self.bond_rings.resize(n_bonds, Vec::new());
    }
}

type Cycle = (Vec<usize>, Vec<usize>);

fn sssr(n: usize, bonds: &[(usize, usize)]) -> Vec<Cycle> {
    let mut adj = vec![Vec::new(); n];
    for (bi, &(a, b)) in bonds.iter().enumerate() {
        adj[a].push((b, bi));
        adj[b].push((a, bi));
    }
    let components = count_components(n, &adj);
    let cyclomatic = (bonds.len() + components).saturating_sub(n);
    if cyclomatic == 0 {
        return Vec::new();
    }
    // peel off acyclic branches so only the cyclic core is searched
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    while let Some(v) = queue.pop_front() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        for &(w, _) in &adj[v] {
            if !removed[w] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    queue.push_back(w);
                }
            }
        }
    }
    let words = bonds.len().div_ceil(64);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut candidates: Vec<(Vec<u64>, Vec<usize>, Vec<usize>)> = Vec::new();
    for root in (0..n).filter(|&v| !removed[v]) {
        let (dist, parent) = bfs(root, &adj, &removed);
        for (bi, &(x, y)) in bonds.iter().enumerate() {
            if removed[x] || removed[y] || dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            // each cycle through the root is generated by its far edge
            if parent[y].map(|p| p.1) == Some(bi) || parent[x].map(|p| p.1) == Some(bi) {
                continue;
            }
            let px = path_to_root(x, &parent);
            let py = path_to_root(y, &parent);
            let sx: HashSet<usize> = px.iter().map(|p| p.0).collect();
            if py.iter().filter(|p| sx.contains(&p.0)).count() != 1 {
                continue;
            }
            let mut atoms: Vec<usize> = px.iter().rev().map(|p| p.0).collect();
            atoms.extend(py.iter().take(py.len() - 1).map(|p| p.0));
            let mut rbonds: Vec<usize> = px.iter().filter_map(|p| p.1).collect();
            rbonds.push(bi);
            rbonds.extend(py.iter().filter_map(|p| p.1));
            let mut bits = vec![0u64; words];
            for &b in &rbonds {
                bits[b / 64] |= 1 << (b % 64);
            }
            if seen.insert(bits.clone()) {
                candidates.push((bits, atoms, rbonds));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.1.len().cmp(&b.1.len()).then_with(|| {
            let mut sa = a.1.clone();
            let mut sb = b.1.clone();
            sa.sort_unstable();
            sb.sort_unstable();
            sa.cmp(&sb)
        })
    });
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut out = Vec::new();
    for (bits, atoms, mut rbonds) in candidates {
        let mut v = bits;
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (a, b) in v.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
        let Some(pivot) = first_bit(&v) else { continue };
        basis.push((pivot, v));
        rbonds.sort_unstable();
        out.push((atoms, rbonds));
        if out.len() == cyclomatic {
            break;
        }
    }
    out
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

type Parent = Option<(usize, usize)>;

fn bfs(root: usize, adj: &[Vec<(usize, usize)>], removed: &[bool]) -> (Vec<usize>, Vec<Parent>) {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    dist[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &(w, b) in &adj[v] {
            if !removed[w] && dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = Some((v, b));
                q.push_back(w);
            }
        }
    }
    (dist, parent)
}

/// Path from `v` up to the root as (atom, bond to its parent) pairs.
fn path_to_root(v: usize, parent: &[Parent]) -> Vec<(usize, Option<usize>)> {
    let mut out = Vec::new();
    let mut cur = v;
    loop {
        match parent[cur] {
            Some((p, b)) => {
                out.push((cur, Some(b)));
                cur = p;
            }
            None => {
                out.push((cur, None));
                return out;
            }
        }
    }
}

fn count_components(n: usize, adj: &[Vec<(usize, usize)>]) -> usize {
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}
