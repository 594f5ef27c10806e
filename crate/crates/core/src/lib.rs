//! Molecule handling, descriptor calculation, instruction-data synthesis and
//! evaluation metrics for small-molecule language-model pipelines.
//!
//! The chemistry layer is self-contained: SMILES are parsed into
//! [`Molecule`] graphs with kekulization, implicit hydrogens, SSSR rings and
//! aromaticity perception, and every descriptor is computed from those graphs.

pub mod chem;
pub mod corpus;
pub mod eval;
pub mod instruct;
pub mod props;

pub use chem::{is_valid_smiles, parse_smiles, write_smiles, ChemError, Molecule};
pub use props::{descriptor_vector, DescriptorId, PropertyVector, Registry};

/// Versions of the bundled data tables, reported by the CLI.
pub fn data_table_versions() -> Vec<(&'static str, u32)> {
    vec![
        ("elements", chem::element::TABLE_VERSION),
        ("isotopes", chem::element::ISOTOPE_TABLE_VERSION),
        ("crippen", props::crippen::TABLE_VERSION),
        ("tpsa", props::tpsa::TABLE_VERSION),
        ("qed", props::qed::TABLE_VERSION),
        ("maccs_lite", props::fingerprint::MACCS_TABLE_VERSION),
    ]
}
