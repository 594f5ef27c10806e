//! Seeded synthetic molecules with structural captions, used as a stand-in
//! for captioned corpora in demos and end-to-end tests.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chem::{parse_smiles, write_smiles};
use crate::props::tpsa::ertl_tpsa;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub smiles: String,
    pub caption: String,
}

struct Scaffold {
    name: &'static str,
    atoms: &'static [&'static str],
    open: &'static [usize],
}

const SCAFFOLDS: &[Scaffold] = &[
    Scaffold { name: "benzene", atoms: &["c1", "c", "c", "c", "c", "c1"], open: &[0, 1, 2, 3, 4, 5] },
    Scaffold { name: "pyridine", atoms: &["c1", "c", "c", "n", "c", "c1"], open: &[0, 1, 2, 4, 5] },
    Scaffold { name: "pyrimidine", atoms: &["c1", "c", "n", "c", "n", "c1"], open: &[0, 1, 3, 5] },
    Scaffold { name: "thiophene", atoms: &["c1", "c", "c", "s", "c1"], open: &[0, 1, 2, 4] },
    Scaffold { name: "furan", atoms: &["c1", "c", "c", "o", "c1"], open: &[0, 1, 2, 4] },
    Scaffold { name: "cyclohexane", atoms: &["C1", "C", "C", "C", "C", "C1"], open: &[0, 1, 2, 3, 4, 5] },
    Scaffold { name: "cyclopentane", atoms: &["C1", "C", "C", "C", "C1"], open: &[0, 1, 2, 3, 4] },
    Scaffold { name: "piperidine", atoms: &["C1", "C", "C", "N", "C", "C1"], open: &[0, 1, 2, 3, 4, 5] },
    Scaffold { name: "morpholine", atoms: &["C1", "C", "O", "C", "C", "N1"], open: &[0, 1, 3, 4, 5] },
    Scaffold {
        name: "naphthalene",
        atoms: &["c1", "c", "c", "c2", "c", "c", "c", "c", "c2", "c1"],
        open: &[0, 1, 2, 4, 5, 6, 7, 9],
    },
];

const SUBSTITUENTS: &[(&str, &str)] = &[
    ("methyl", "C"),
    ("ethyl", "CC"),
    ("hydroxy", "O"),
    ("amino", "N"),
    ("chloro", "Cl"),
    ("fluoro", "F"),
    ("bromo", "Br"),
    ("methoxy", "OC"),
    ("carboxy", "C(=O)O"),
    ("cyano", "C#N"),
    ("acetyl", "C(C)=O"),
    ("nitro", "[N+](=O)[O-]"),
    ("carbamoyl", "C(N)=O"),
    ("trifluoromethyl", "C(F)(F)F"),
    ("sulfamoyl", "S(N)(=O)=O"),
    ("dimethylamino", "N(C)C"),
    ("methoxycarbonyl", "C(=O)OC"),
    ("vinyl", "C=C"),
];

const LINKERS: &[(&str, &str)] =
    &[("direct bond", ""), ("methylene", "C"), ("ethylene", "CC"), ("ether", "O"), ("amide", "C(=O)N"), ("amine", "N")];

const CHAIN_WORDS: &[&str] = &["", "", "", "three-carbon", "four-carbon", "five-carbon", "six-carbon", "seven-carbon"];

fn article(word: &str) -> &'static str {
    if word.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

fn list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn substituent_phrase(names: &[&str]) -> String {
    match names {
        [] => String::new(),
        [one] => format!(" bearing {} {one} group", article(one)),
        _ => format!(" bearing {} groups", list(names)),
    }
}

/// Ring SMILES with `(X)` branches after chosen atoms; ring labels shifted
/// by `shift` so two scaffolds can share one string.
fn decorate(s: &Scaffold, branches: &[(usize, String)], shift: u8) -> String {
    let mut out = String::new();
    for (i, tok) in s.atoms.iter().enumerate() {
        for ch in tok.chars() {
            if let Some(d) = ch.to_digit(10) {
                out.push(char::from(b'0' + d as u8 + shift));
            } else {
                out.push(ch);
            }
        }
        for (_, b) in branches.iter().filter(|(p, _)| *p == i) {
            out.push('(');
            out.push_str(b);
            out.push(')');
        }
    }
    out
}

fn pick_substituents(rng: &mut ChaCha8Rng, k: usize) -> Vec<(&'static str, &'static str)> {
    let mut subs: Vec<_> = SUBSTITUENTS.choose_multiple(rng, k).copied().collect();
    subs.sort_by_key(|s| s.0);
    subs
}

fn ring_molecule(rng: &mut ChaCha8Rng) -> (String, String) {
    let a = SCAFFOLDS.choose(rng).unwrap();
    let linked = rng.random_bool(0.35);
    let k = rng.random_range(if linked { 0..=2 } else { 1..=3 });
    let mut open = a.open.to_vec();
    open.shuffle(rng);
    let subs = pick_substituents(rng, k);
    let mut branches: Vec<(usize, String)> = subs.iter().zip(&open).map(|(s, &p)| (p, s.1.to_string())).collect();
    let names: Vec<&str> = subs.iter().map(|s| s.0).collect();
    let mut caption = format!("The molecule is {} {} derivative{}", article(a.name), a.name, substituent_phrase(&names));

    if linked {
        let b = SCAFFOLDS.choose(rng).unwrap();
        let link = LINKERS.choose(rng).unwrap();
        let b_k = rng.random_range(0..=1);
        let b_subs = pick_substituents(rng, b_k);
        let mut b_open: Vec<usize> = b.open.iter().copied().filter(|&p| p != 0).collect();
        b_open.shuffle(rng);
        let b_branches: Vec<(usize, String)> = b_subs.iter().zip(&b_open).map(|(s, &p)| (p, s.1.to_string())).collect();
        // the other ring is written starting from its own atom 0
        let b_smiles = decorate(b, &b_branches, 2);
        branches.push((open[k], format!("{}{}", link.1, b_smiles)));
        let b_names: Vec<&str> = b_subs.iter().map(|s| s.0).collect();
        let joint = if link.1.is_empty() { "directly bonded".to_string() } else { format!("joined through {} {} linker", article(link.0), link.0) };
        caption.push_str(&format!(", {joint} to {} {} ring{}", article(b.name), b.name, substituent_phrase(&b_names)));
    }
    (decorate(a, &branches, 0), caption)
}

fn chain_molecule(rng: &mut ChaCha8Rng) -> (String, String) {
    let len = rng.random_range(3..=7usize);
    let k = rng.random_range(1..=2);
    let subs = pick_substituents(rng, k);
    let mut pos: Vec<usize> = (0..len).collect();
    pos.shuffle(rng);
    let mut s = String::new();
    for i in 0..len {
        s.push('C');
        for (sub, _) in subs.iter().zip(&pos).filter(|(_, &p)| p == i) {
            s.push('(');
            s.push_str(sub.1);
            s.push(')');
        }
    }
    let names: Vec<&str> = subs.iter().map(|s| s.0).collect();
    let word = CHAIN_WORDS[len];
    (s, format!("The molecule is an acyclic {word} chain{}", substituent_phrase(&names)))
}

/// `n` distinct molecules (by canonical SMILES) with captions. The same
/// seed always yields the same list.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 100 * n + 1000, "synthetic corpus: too many duplicate draws");
        let (raw, mut caption) = if rng.random_bool(0.85) { ring_molecule(&mut rng) } else { chain_molecule(&mut rng) };
        let mol = parse_smiles(&raw).unwrap_or_else(|e| panic!("synthetic corpus built invalid SMILES {raw}: {e}"));
        let smiles = write_smiles(&mol);
        if !seen.insert(smiles.clone()) {
            continue;
        }
        let tpsa = ertl_tpsa(&mol);
        let polarity = if tpsa == 0.0 {
            "a nonpolar compound"
        } else if tpsa < 40.0 {
            "a weakly polar compound"
        } else if tpsa < 90.0 {
            "a moderately polar compound"
        } else {
            "a highly polar compound"
        };
        caption.push_str(&format!(". It is {polarity} with {} heavy atoms.", mol.heavy_atom_count()));
        out.push(CorpusEntry { smiles, caption });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_distinct() {
        let a = synthetic_corpus(300, 5);
        assert_eq!(a, synthetic_corpus(300, 5));
        assert_ne!(a, synthetic_corpus(300, 6));
        let set: HashSet<_> = a.iter().map(|e| &e.smiles).collect();
        assert_eq!(set.len(), 300);
        assert!(a.iter().all(|e| e.caption.starts_with("The molecule is ") && e.caption.ends_with('.')));
    }

    #[test]
    fn decorate_places_branches() {
        let s = decorate(&SCAFFOLDS[0], &[(0, "C".into()), (5, "O".into())], 0);
        assert_eq!(s, "c1(C)ccccc1(O)");
        assert_eq!(decorate(&SCAFFOLDS[9], &[], 2), "c3ccc4ccccc4c3");
    }

    #[test]
    fn list_wording() {
        assert_eq!(substituent_phrase(&["amino"]), " bearing an amino group");
        assert_eq!(substituent_phrase(&["chloro", "methyl", "nitro"]), " bearing chloro, methyl and nitro groups");
    }
}
