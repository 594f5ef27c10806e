use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::chem::{BondOrder, Molecule};

use super::smarts::{Session, Smarts};
use super::PropsError;

pub const MACCS_TABLE_VERSION: u32 = 1;

const MACCS_TSV: &str = include_str!("../../data/maccs_lite.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FingerprintKind {
    Morgan,
    Path,
    MaccsLite,
}

impl fmt::Display for FingerprintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FingerprintKind::Morgan => "morgan",
            FingerprintKind::Path => "path",
            FingerprintKind::MaccsLite => "maccs_lite",
        })
    }
}

impl FromStr for FingerprintKind {
    type Err = PropsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "morgan" => Ok(FingerprintKind::Morgan),
            "path" | "rdkit" => Ok(FingerprintKind::Path),
            "maccs_lite" | "maccs" => Ok(FingerprintKind::MaccsLite),
            _ => Err(PropsError::UnsupportedKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintParams {
    pub radius: u32,
    pub max_path: u32,
    /// Folded width for morgan and path; maccs_lite always uses its key count.
    pub width: usize,
}

impl Default for FingerprintParams {
    fn default() -> Self {
        FingerprintParams { radius: 2, max_path: 7, width: 2048 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub kind: FingerprintKind,
    pub params: FingerprintParams,
    width: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn empty(kind: FingerprintKind, params: FingerprintParams, width: usize) -> Self {
        Fingerprint { kind, params, width, words: vec![0; width.div_ceil(64)] }
    }

    pub fn from_bits(kind: FingerprintKind, width: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut fp = Fingerprint::empty(kind, FingerprintParams { width, ..Default::default() }, width);
        for b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} outside width {}", self.width);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn contains(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn on_bits(&self) -> Vec<usize> {
        (0..self.width).filter(|&b| self.contains(b)).collect()
    }
}

/// |a and b| / |a or b|; two empty fingerprints are identical (1.0).
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, PropsError> {
    if a.kind != b.kind || a.width != b.width {
        return Err(PropsError::KindMismatch {
            left: format!("{}/{}", a.kind, a.width),
            right: format!("{}/{}", b.kind, b.width),
        });
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 { 1.0 } else { both as f64 / either as f64 })
}

pub fn fingerprint(mol: &Molecule, kind: FingerprintKind, params: FingerprintParams) -> Result<Fingerprint, PropsError> {
    if kind != FingerprintKind::MaccsLite && params.width == 0 {
        return Err(PropsError::UnsupportedKind(format!("{kind} with width 0")));
    }
    Ok(match kind {
        FingerprintKind::Morgan => {
            let mut fp = Fingerprint::empty(kind, params, params.width);
            for h in morgan_environments(mol, params.radius) {
                fp.set((h % params.width as u64) as usize);
            }
            fp
        }
        FingerprintKind::Path => {
            let mut fp = Fingerprint::empty(kind, params, params.width);
            for h in path_hashes(mol, params.max_path) {
                fp.set((h % params.width as u64) as usize);
            }
            fp
        }
        FingerprintKind::MaccsLite => maccs_lite(mol, params),
    })
}

// splitmix64 finaliser; a fixed function so bit layouts never change
// between builds or platforms
fn mix(h: u64, x: u64) -> u64 {
    let mut z = h ^ x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn bond_code(order: BondOrder) -> u64 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

/// Distinct circular environments up to `radius`, as 64-bit identifiers.
/// An environment whose bond set adds nothing over one already emitted is
/// dropped, as is an atom's environment once it stops growing.
pub fn morgan_environments(mol: &Molecule, radius: u32) -> Vec<u64> {
    let n = mol.num_atoms();
    let rings = mol.ring_info();
    let nbonds = mol.num_bonds();
    let mut inv: Vec<u64> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            let heavy = mol.neighbors(i).iter().filter(|(j, _)| mol.atom(*j).element > 1).count();
            let mut h = mix(0, a.element as u64);
            h = mix(h, heavy as u64);
            h = mix(h, (a.charge as i64 + 128) as u64);
            h = mix(h, mol.total_h(i) as u64);
            mix(h, rings.is_atom_in_ring(i) as u64)
        })
        .collect();
    let mut out: Vec<u64> = Vec::new();
    let mut seen_sets: HashSet<Vec<u64>> = HashSet::new();
    // radius 0: single atoms, one environment per distinct invariant
    let mut emitted: HashSet<u64> = HashSet::new();
    for &h in &inv {
        if emitted.insert(h) {
            out.push(h);
        }
    }
    seen_sets.insert(vec![0; nbonds.div_ceil(64)]);
    let mut hoods: Vec<Vec<u64>> = vec![vec![0; nbonds.div_ceil(64)]; n];
    let mut alive = vec![true; n];
    for r in 1..=radius {
        let mut next_inv = inv.clone();
        let mut next_hoods = hoods.clone();
        let mut candidates: Vec<(Vec<u64>, u64, usize)> = Vec::new();
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let mut nbrs: Vec<(u64, u64)> =
                mol.neighbors(i).iter().map(|&(j, b)| (bond_code(mol.bond(b).order), inv[j])).collect();
            nbrs.sort_unstable();
            let mut h = mix(r as u64, inv[i]);
            for (bc, ni) in nbrs {
                h = mix(mix(h, bc), ni);
            }
            let mut hood = hoods[i].clone();
            for &(j, b) in mol.neighbors(i) {
                hood[b / 64] |= 1 << (b % 64);
                for (w, x) in hood.iter_mut().zip(&hoods[j]) {
                    *w |= x;
                }
            }
            next_inv[i] = h;
            if hood == hoods[i] {
                alive[i] = false;
                continue;
            }
            next_hoods[i] = hood.clone();
            candidates.push((hood, h, i));
        }
        // identical bond sets collapse onto the smallest identifier
        candidates.sort();
        for (hood, h, _) in candidates {
            if seen_sets.insert(hood) && emitted.insert(h) {
                out.push(h);
            }
        }
        inv = next_inv;
        hoods = next_hoods;
    }
    out
}

/// Identifiers of all linear paths with 1..=max_len bonds, each taken in
/// its lexicographically smaller direction.
fn path_hashes(mol: &Molecule, max_len: u32) -> HashSet<u64> {
    let atom_code = |i: usize| {
        let a = mol.atom(i);
        (a.element as u64) << 1 | a.aromatic as u64
    };
    let mut out = HashSet::new();
    let mut atoms = Vec::new();
    let mut bonds = Vec::new();
    let mut on_path = vec![false; mol.num_atoms()];
    for start in 0..mol.num_atoms() {
        atoms.push(start);
        on_path[start] = true;
        walk(mol, max_len as usize, &atom_code, &mut atoms, &mut bonds, &mut on_path, &mut out);
        on_path[start] = false;
        atoms.pop();
    }
    out
}

fn walk(
    mol: &Molecule,
    max_len: usize,
    atom_code: &dyn Fn(usize) -> u64,
    atoms: &mut Vec<usize>,
    bonds: &mut Vec<u64>,
    on_path: &mut Vec<bool>,
    out: &mut HashSet<u64>,
) {
    if !bonds.is_empty() {
        let fwd: Vec<u64> = sequence(atoms.iter().copied(), bonds.iter().copied(), atom_code);
        let rev: Vec<u64> = sequence(atoms.iter().rev().copied(), bonds.iter().rev().copied(), atom_code);
        let seq = fwd.min(rev);
        out.insert(seq.iter().fold(mix(0, bonds.len() as u64), |h, &x| mix(h, x)));
    }
    if bonds.len() == max_len {
        return;
    }
    let last = *atoms.last().unwrap();
    for &(n, b) in mol.neighbors(last) {
        if on_path[n] {
            continue;
        }
        on_path[n] = true;
        atoms.push(n);
        bonds.push(bond_code(mol.bond(b).order));
        walk(mol, max_len, atom_code, atoms, bonds, on_path, out);
        bonds.pop();
        atoms.pop();
        on_path[n] = false;
    }
}

fn sequence(
    atoms: impl Iterator<Item = usize>,
    mut bonds: impl Iterator<Item = u64>,
    atom_code: &dyn Fn(usize) -> u64,
) -> Vec<u64> {
    let mut seq = Vec::new();
    for (k, a) in atoms.enumerate() {
        if k > 0 {
            seq.push(bonds.next().unwrap() | 1 << 32);
        }
        seq.push(atom_code(a));
    }
    seq
}

struct Key {
    threshold: usize,
    pattern: Smarts,
}

fn maccs_keys() -> &'static [Key] {
    static T: OnceLock<Vec<Key>> = OnceLock::new();
    T.get_or_init(|| {
        MACCS_TSV
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                Key {
                    threshold: f[1].parse().expect("maccs table: threshold"),
                    pattern: Smarts::new(f[2]).unwrap_or_else(|e| panic!("maccs table: key {}: {e}", f[0])),
                }
            })
            .collect()
    })
}

/// Number of keys in the maccs_lite set, which is also its bit width.
pub fn maccs_lite_width() -> usize {
    maccs_keys().len()
}

fn maccs_lite(mol: &Molecule, params: FingerprintParams) -> Fingerprint {
    let keys = maccs_keys();
    let mut fp = Fingerprint::empty(FingerprintKind::MaccsLite, params, keys.len());
    let session = Session::new(mol);
    for (bit, key) in keys.iter().enumerate() {
        let hit = if key.threshold == 0 {
            key.pattern.has_match_in(&session)
        } else {
            key.pattern.matches_in(&session).len() > key.threshold
        };
        if hit {
            fp.set(bit);
        }
    }
    fp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn fp(s: &str, kind: FingerprintKind) -> Fingerprint {
        fingerprint(&parse_smiles(s).unwrap(), kind, FingerprintParams::default()).unwrap()
    }

    const KINDS: [FingerprintKind; 3] = [FingerprintKind::Morgan, FingerprintKind::Path, FingerprintKind::MaccsLite];

    #[test]
    fn tanimoto_examples() {
        let a = Fingerprint::from_bits(FingerprintKind::Path, 16, [1, 2, 3]);
        let b = Fingerprint::from_bits(FingerprintKind::Path, 16, [2, 3, 4]);
        let c = Fingerprint::from_bits(FingerprintKind::Path, 16, [7, 8]);
        let e = Fingerprint::from_bits(FingerprintKind::Path, 16, []);
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        assert_eq!(tanimoto(&e, &e).unwrap(), 1.0);
        let m = Fingerprint::from_bits(FingerprintKind::Morgan, 16, [1]);
        assert!(matches!(tanimoto(&a, &m), Err(PropsError::KindMismatch { .. })));
    }

    #[test]
    fn atom_order_does_not_matter() {
        for kind in KINDS {
            assert_eq!(fp("CCO", kind), fp("OCC", kind), "{kind}");
            assert_eq!(fp("c1ccccc1O", kind), fp("Oc1ccccc1", kind), "{kind}");
        }
    }

    #[test]
    fn benzene_and_cyclohexane_differ() {
        for kind in KINDS {
            assert_ne!(fp("c1ccccc1", kind).on_bits(), fp("C1CCCCC1", kind).on_bits(), "{kind}");
        }
    }

    #[test]
    fn methane_has_one_environment() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(morgan_environments(&m, 2).len(), 1);
        assert_eq!(fp("C", FingerprintKind::Morgan).count_ones(), 1);
    }

    #[test]
    fn ethane_environments_by_hand() {
        // radius 0: the two methyls share one invariant; radius 1 covers the
        // single bond once; radius 2 adds nothing
        assert_eq!(morgan_environments(&parse_smiles("CC").unwrap(), 2).len(), 2);
    }

    #[test]
    fn path_lengths_are_bounded() {
        // hexane: paths of 1..5 bonds, one identifier each by symmetry of
        // direction, so 5 distinct paths
        assert_eq!(path_hashes(&parse_smiles("CCCCCC").unwrap(), 7).len(), 5);
        assert_eq!(path_hashes(&parse_smiles("CCCCCC").unwrap(), 3).len(), 3);
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(matches!("ecfp".parse::<FingerprintKind>(), Err(PropsError::UnsupportedKind(_))));
        assert_eq!(fp("CCO", FingerprintKind::MaccsLite).width(), maccs_lite_width());
    }
}
