//! Periodic-table data: weights, monoisotopic masses, valence shells.

use std::collections::HashMap;
use std::sync::OnceLock;

pub const TABLE_VERSION: u32 = 1;
pub const ISOTOPE_TABLE_VERSION: u32 = 1;

const ELEMENTS_TSV: &str = include_str!("../../data/elements.tsv");
const ISOTOPES_TSV: &str = include_str!("../../data/isotopes.tsv");

#[derive(Debug, Clone)]
pub struct ElementData {
    pub atomic_number: u8,
    pub symbol: String,
    pub average_weight: f64,
    /// Mass of the most abundant isotope.
    pub monoisotopic_mass: f64,
    pub outer_electrons: u8,
    /// Permitted valences of the neutral atom, ascending. Empty for metals
    /// and noble gases, which get no implicit hydrogens.
    pub valences: Vec<u8>,
}

struct Tables {
    by_number: Vec<Option<ElementData>>,
    by_symbol: HashMap<String, u8>,
    isotopes: HashMap<(u8, u16), f64>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut by_number: Vec<Option<ElementData>> = vec![None; 128];
        let mut by_symbol = HashMap::new();
        for line in ELEMENTS_TSV.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            let z: u8 = f[0].parse().expect("element table: atomic number");
            let valences = if f[5] == "-" {
                Vec::new()
            } else {
                f[5].split(',').map(|v| v.parse().expect("element table: valence")).collect()
            };
            let e = ElementData {
                atomic_number: z,
                symbol: f[1].to_string(),
                average_weight: f[2].parse().expect("element table: weight"),
                monoisotopic_mass: f[3].parse().expect("element table: mass"),
                outer_electrons: f[4].parse().expect("element table: outer electrons"),
                valences,
            };
            by_symbol.insert(e.symbol.clone(), z);
            by_number[z as usize] = Some(e);
        }
        let mut isotopes = HashMap::new();
        for line in ISOTOPES_TSV.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            isotopes.insert(
                (f[0].parse().expect("isotope table"), f[1].parse().expect("isotope table")),
                f[2].parse().expect("isotope table"),
            );
        }
        Tables { by_number, by_symbol, isotopes }
    })
}

pub fn element(z: u8) -> Option<&'static ElementData> {
    tables().by_number.get(z as usize).and_then(|e| e.as_ref())
}

pub fn atomic_number(symbol: &str) -> Option<u8> {
    tables().by_symbol.get(symbol).copied()
}

pub fn symbol(z: u8) -> &'static str {
    element(z).map(|e| e.symbol.as_str()).unwrap_or("*")
}

pub fn isotope_mass(z: u8, mass_number: u16) -> Option<f64> {
    tables().isotopes.get(&(z, mass_number)).copied()
}

/// Elements that may be written without brackets in SMILES.
pub fn is_organic_subset(z: u8) -> bool {
    matches!(z, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
}

pub fn is_halogen(z: u8) -> bool {
    matches!(z, 9 | 17 | 35 | 53 | 85)
}

/// Permitted valences for an atom carrying `charge`.
///
/// A charged main-group atom takes the valence list of its isoelectronic
/// neighbour in the same period: N+ behaves like C, O+ like N, C- like N and
/// C+ like B. Elements without valence data stay empty.
pub fn allowed_valences(z: u8, charge: i8) -> Vec<u8> {
    let Some(e) = element(z) else { return Vec::new() };
    if e.valences.is_empty() {
        return Vec::new();
    }
    if charge == 0 {
        return e.valences.clone();
    }
    let outer = e.outer_electrons as i32;
    // valence electrons after removing the charge
    let eff = outer - charge as i32;
    // an emptied or completed shell ([B+3], [O-2], [F-]... [Cl-]) bonds to nothing
    if eff == 0 || eff == 8 {
        return vec![0];
    }
    if !(1..=7).contains(&eff) {
        return Vec::new();
    }
    // period rows 2 and 3+ differ in whether expanded octets exist
    let expanded = z > 10;
    let base = if eff <= 4 { eff } else { 8 - eff };
    let mut out = vec![base as u8];
    if expanded && eff > 4 {
        let mut v = base + 2;
        while v <= eff {
            out.push(v as u8);
            v += 2;
        }
    }
    out
}

/// Smallest permitted valence that is at least `explicit`.
pub fn target_valence(z: u8, charge: i8, explicit: u32) -> Option<u32> {
    allowed_valences(z, charge).into_iter().map(u32::from).find(|&v| v >= explicit)
}

pub fn default_valence(z: u8) -> Option<u8> {
    element(z).and_then(|e| e.valences.first().copied())
}

/// Pauling-style electronegativity ordering used by aromaticity perception.
pub fn more_electronegative(a: u8, b: u8) -> bool {
    electronegativity(a) > electronegativity(b)
}

fn electronegativity(z: u8) -> f64 {
    match z {
        1 => 2.20,
        5 => 2.04,
        6 => 2.55,
        7 => 3.04,
        8 => 3.44,
        9 => 3.98,
        14 => 1.90,
        15 => 2.19,
        16 => 2.58,
        17 => 3.16,
        33 => 2.18,
        34 => 2.55,
        35 => 2.96,
        52 => 2.10,
        53 => 2.66,
        _ => 1.5,
    }
}
