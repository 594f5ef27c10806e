use std::sync::OnceLock;

use crate::chem::Molecule;

use super::smarts::{Session, Smarts};

pub const TABLE_VERSION: u32 = 1;

const CRIPPEN_TSV: &str = include_str!("../../data/crippen.tsv");

struct Rule {
    type_id: String,
    pattern: Smarts,
    logp: f64,
    mr: f64,
}

fn rules() -> &'static [Rule] {
    static T: OnceLock<Vec<Rule>> = OnceLock::new();
    T.get_or_init(|| {
        CRIPPEN_TSV
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|line| {
                let f: Vec<&str> = line.split('\t').collect();
                Rule {
                    type_id: f[0].to_string(),
                    pattern: Smarts::new(f[1]).unwrap_or_else(|e| panic!("crippen table: {}: {e}", f[1])),
                    logp: f[2].parse().expect("crippen table: logP"),
                    mr: if f[3] == "-" { 0.0 } else { f[3].parse().expect("crippen table: MR") },
                }
            })
            .collect()
    })
}

/// Wildman-Crippen type of one atom, with its two contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct CrippenType {
    pub type_id: &'static str,
    pub logp: f64,
    pub mr: f64,
}

/// Types every atom of the hydrogen-expanded molecule. The first rule in
/// table order whose first pattern atom lands on an atom types it; atoms no
/// rule reaches get `None` and contribute nothing.
pub fn crippen_types(mol: &Molecule) -> (Molecule, Vec<Option<CrippenType>>) {
    let full = mol.with_explicit_hydrogens();
    let session = Session::new(&full);
    let mut types: Vec<Option<CrippenType>> = vec![None; full.num_atoms()];
    let mut left = full.num_atoms();
    for rule in rules() {
        if left == 0 {
            break;
        }
        for (i, slot) in types.iter_mut().enumerate() {
            if slot.is_none() && rule.pattern.matches_at(&session, i) {
                *slot = Some(CrippenType { type_id: rule.type_id.as_str(), logp: rule.logp, mr: rule.mr });
                left -= 1;
            }
        }
    }
    (full, types)
}

pub fn crippen_logp(mol: &Molecule) -> f64 {
    crippen_types(mol).1.iter().flatten().map(|t| t.logp).sum()
}

pub fn crippen_mr(mol: &Molecule) -> f64 {
    crippen_types(mol).1.iter().flatten().map(|t| t.mr).sum()
}
