//! Molecular graphs: SMILES lexing and parsing, rings, aromaticity and
//! canonical SMILES output.

mod aromatic;
pub mod canon;
pub mod element;
mod error;
pub mod iso;
mod mol;
mod parse;
pub mod rings;
pub mod token;

pub use canon::{canonical_ranks, random_smiles, write_smiles};
pub use error::ChemError;
pub use iso::are_isomorphic;
pub use mol::{Atom, Bond, BondOrder, Molecule};
pub use parse::parse_smiles;
pub use rings::RingInfo;
pub use token::{tokenize_smiles, Token, TokenKind};

/// True when `text` parses; the Validity metric is the mean of this.
pub fn is_valid_smiles(text: &str) -> bool {
    parse_smiles(text).is_ok()
}
