use std::sync::OnceLock;

use crate::chem::{BondOrder, Molecule};

pub const TABLE_VERSION: u32 = 1;

const TPSA_TSV: &str = include_str!("../../data/tpsa.tsv");

#[derive(Debug, Clone, Copy, PartialEq)]
enum SmallRing {
    Only,
    Never,
    Either,
}

#[derive(Debug, Clone)]
struct Entry {
    element: u8,
    heavy: u32,
    h: u32,
    charge: i32,
    // single, double, triple, aromatic
    bonds: [u32; 4],
    three_ring: SmallRing,
    value: f64,
}

fn table() -> &'static [Entry] {
    static T: OnceLock<Vec<Entry>> = OnceLock::new();
    T.get_or_init(|| {
        TPSA_TSV
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|line| {
                let f: Vec<&str> = line.split('\t').collect();
                let num = |i: usize| f[i].parse::<u32>().expect("tpsa table: count");
                Entry {
                    element: match f[0] {
                        "N" => 7,
                        "O" => 8,
                        other => panic!("tpsa table: unexpected element {other}"),
                    },
                    heavy: num(1),
                    h: num(2),
                    charge: f[3].parse().expect("tpsa table: charge"),
                    bonds: [num(4), num(5), num(6), num(7)],
                    three_ring: match f[8] {
                        "y" => SmallRing::Only,
                        "n" => SmallRing::Never,
                        _ => SmallRing::Either,
                    },
                    value: f[9].parse().expect("tpsa table: contribution"),
                }
            })
            .collect()
    })
}

/// Per-atom polar surface contributions; atoms other than N and O, and N/O
/// environments missing from the table, contribute 0.
pub fn tpsa_contributions(mol: &Molecule) -> Vec<f64> {
    let rings = mol.ring_info();
    (0..mol.num_atoms())
        .map(|i| {
            let a = mol.atom(i);
            if a.element != 7 && a.element != 8 {
                return 0.0;
            }
            let mut heavy = 0;
            let mut bonds = [0u32; 4];
            for &(n, b) in mol.neighbors(i) {
                if mol.atom(n).element == 1 {
                    continue;
                }
                heavy += 1;
                let slot = match mol.bond(b).order {
                    BondOrder::Single => 0,
                    BondOrder::Double => 1,
                    BondOrder::Triple => 2,
                    BondOrder::Aromatic => 3,
                };
                bonds[slot] += 1;
            }
            let h = mol.total_h(i);
            let in3 = rings.atom_in_ring_of_size(i, 3);
            table()
                .iter()
                .find(|e| {
                    e.element == a.element
                        && e.heavy == heavy
                        && e.h == h
                        && e.charge == a.charge as i32
                        && e.bonds == bonds
                        && match e.three_ring {
                            SmallRing::Only => in3,
                            SmallRing::Never => !in3,
                            SmallRing::Either => true,
                        }
                })
                .map_or(0.0, |e| e.value)
        })
        .collect()
}

/// Topological polar surface area in square angstroms.
pub fn ertl_tpsa(mol: &Molecule) -> f64 {
    tpsa_contributions(mol).iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn tpsa(s: &str) -> f64 {
        ertl_tpsa(&parse_smiles(s).unwrap())
    }

    #[test]
    fn hydrocarbons_are_nonpolar() {
        assert_eq!(tpsa("CCCC"), 0.0);
        assert_eq!(tpsa("c1ccccc1"), 0.0);
    }

    #[test]
    fn single_fragment_values() {
        // hydroxyl, carbonyl, primary amine, pyridine nitrogen
        assert!((tpsa("CCO") - 20.23).abs() < 1e-9);
        assert!((tpsa("CC=O") - 17.07).abs() < 1e-9);
        assert!((tpsa("CCN") - 26.02).abs() < 1e-9);
        assert!((tpsa("c1ccncc1") - 12.89).abs() < 1e-9);
        assert!((tpsa("c1cc[nH]c1") - 15.79).abs() < 1e-9);
    }

    #[test]
    fn three_ring_distinguished() {
        assert!((tpsa("C1CO1") - 12.53).abs() < 1e-9);
        assert!((tpsa("COC") - 9.23).abs() < 1e-9);
    }

    #[test]
    fn acetic_acid_sums_two_oxygens() {
        assert!((tpsa("CC(=O)O") - (17.07 + 20.23)).abs() < 1e-9);
    }
}
