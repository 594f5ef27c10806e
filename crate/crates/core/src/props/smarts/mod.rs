//! A SMARTS subset: atom primitives `* A a #n` element symbols, `H h D X v
//! R r x`, charges, isotopes and recursive `$()` groups; bond primitives
//! `- = # : ~ @`; the `! & , ;` operators, branches and ring closures.
//! Chirality, hybridization, ranges and reaction SMARTS are rejected.

mod matcher;
mod parse;

use thiserror::Error;

use crate::chem::Molecule;

pub(crate) use matcher::Session;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmartsError {
    #[error("unsupported SMARTS feature '{feature}' at position {position}")]
    UnsupportedSmartsFeature { feature: String, position: usize },
    #[error("invalid SMARTS at position {position}: {reason}")]
    Invalid { position: usize, reason: String },
}

/// A compiled pattern.
#[derive(Debug, Clone)]
pub struct Smarts {
    text: String,
    pattern: parse::Pattern,
}

impl Smarts {
    pub fn new(text: &str) -> Result<Self, SmartsError> {
        Ok(Smarts { text: text.to_string(), pattern: parse::parse(text)? })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn num_atoms(&self) -> usize {
        self.pattern.atoms.len()
    }

    /// Embeddings with automorphic duplicates removed: two matches covering
    /// the same atom set count once.
    pub fn matches(&self, mol: &Molecule) -> Vec<Vec<usize>> {
        Session::new(mol).unique_matches(&self.pattern)
    }

    pub fn count(&self, mol: &Molecule) -> usize {
        self.matches(mol).len()
    }

    pub fn has_match(&self, mol: &Molecule) -> bool {
        Session::new(mol).has_match(&self.pattern)
    }

    /// Atoms that the first pattern atom can be mapped onto.
    pub fn root_atoms(&self, mol: &Molecule) -> Vec<bool> {
        Session::new(mol).root_matches(&self.pattern)
    }

    /// Rooted query inside a shared session; used when many patterns type
    /// the atoms of one molecule.
    pub(crate) fn matches_at(&self, session: &Session, atom: usize) -> bool {
        session.matches_at(&self.pattern, atom)
    }

    pub(crate) fn has_match_in(&self, session: &Session) -> bool {
        session.has_match(&self.pattern)
    }

    pub(crate) fn matches_in(&self, session: &Session) -> Vec<Vec<usize>> {
        session.unique_matches(&self.pattern)
    }
}

/// Number of distinct matches of `pattern` in `mol`.
pub fn match_smarts_subset(mol: &Molecule, pattern: &str) -> Result<usize, SmartsError> {
    Ok(Smarts::new(pattern)?.count(mol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn count(smiles: &str, pattern: &str) -> usize {
        match_smarts_subset(&parse_smiles(smiles).unwrap(), pattern).unwrap()
    }

    #[test]
    fn basic_counts() {
        assert_eq!(count("CCO", "[OH]"), 1);
        assert_eq!(count("c1ccccc1", "c"), 6);
        assert_eq!(count("CCO", "[N+]"), 0);
    }

    #[test]
    fn automorphic_embeddings_collapse() {
        // six ring bonds, each found twice by the symmetric pattern
        assert_eq!(count("c1ccccc1", "cc"), 6);
        assert_eq!(count("c1ccccc1", "c1ccccc1"), 1);
        // central atom plus three of the four methyls
        assert_eq!(count("CC(C)(C)C", "C(C)(C)C"), 4);
    }

    #[test]
    fn implicit_bond_is_single_or_aromatic() {
        assert_eq!(count("C=C", "CC"), 0);
        assert_eq!(count("C=C", "C~C"), 1);
        assert_eq!(count("c1ccccc1C", "cC"), 1);
        assert_eq!(count("c1ccccc1C", "c-C"), 1);
        assert_eq!(count("c1ccccc1C", "c:c"), 6);
    }

    #[test]
    fn ring_primitives() {
        assert_eq!(count("C1CCCCC1CC", "[R]"), 6);
        assert_eq!(count("C1CCCCC1CC", "[R0]"), 2);
        assert_eq!(count("c1ccc2ccccc2c1", "[R2]"), 2);
        assert_eq!(count("C1CC1C1CCC1", "[r3]"), 3);
        assert_eq!(count("C1CCCCC1CC", "[x2]"), 6);
        assert_eq!(count("C1CCCCC1CC", "[x0]"), 2);
        assert_eq!(count("C1CCCCC1CC", "*!@*"), 2);
        assert_eq!(count("C1CCCCC1CC", "*@*"), 6);
    }

    #[test]
    fn counting_primitives() {
        assert_eq!(count("CC(C)(C)O", "[CD4]"), 1);
        assert_eq!(count("CCN", "[NX3;H2]"), 1);
        assert_eq!(count("CS(=O)(=O)C", "[Sv6]"), 1);
        assert_eq!(count("C[N+](C)(C)C", "[N+;X4]"), 1);
        assert_eq!(count("[13CH4]", "[13C]"), 1);
        assert_eq!(count("[O-]C=O", "[O-]"), 1);
        assert_eq!(count("CC", "[CH3]"), 2);
    }

    #[test]
    fn recursion_and_negation() {
        // amide nitrogen excluded, amine kept
        assert_eq!(count("NCC(=O)N", "[N;!$(NC=O)]"), 1);
        assert_eq!(count("OCC(=O)O", "[$([OH]C=O)]"), 1);
        assert_eq!(count("c1ccncc1", "[!#6;a]"), 1);
    }

    #[test]
    fn hydrogen_count_sees_explicit_hydrogen_atoms() {
        let m = parse_smiles("CCO").unwrap().with_explicit_hydrogens();
        assert_eq!(match_smarts_subset(&m, "[CH3]").unwrap(), 1);
        assert_eq!(match_smarts_subset(&m, "[#1]O").unwrap(), 1);
    }
}
