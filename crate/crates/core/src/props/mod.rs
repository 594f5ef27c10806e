//! Descriptors, fingerprints and SMARTS matching over [`Molecule`] graphs.

pub mod balaban;
pub mod counts;
pub mod crippen;
pub mod fingerprint;
pub mod mass;
pub mod qed;
pub mod smarts;
pub mod tpsa;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::Molecule;

pub use balaban::balaban_j;
pub use crippen::crippen_logp;
pub use fingerprint::{fingerprint, tanimoto, Fingerprint, FingerprintKind, FingerprintParams};
pub use mass::{exact_mol_wt, mol_wt};
pub use qed::qed;
pub use smarts::{match_smarts_subset, Smarts, SmartsError};
pub use tpsa::ertl_tpsa;

#[derive(Debug, Error)]
pub enum PropsError {
    #[error("no mass known for atom {atom} (element {element}, isotope {isotope:?})")]
    UnknownElementMass { atom: usize, element: u8, isotope: Option<u16> },
    #[error("unknown descriptor id '{0}'")]
    UnknownDescriptorId(String),
    #[error("descriptor registry is empty")]
    EmptyRegistry,
    #[error("unsupported fingerprint kind '{0}'")]
    UnsupportedKind(String),
    #[error("fingerprint kinds differ: {left} vs {right}")]
    KindMismatch { left: String, right: String },
    #[error(transparent)]
    Smarts(#[from] SmartsError),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

macro_rules! descriptors {
    ($($id:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum DescriptorId {
            $($id),*
        }

        impl DescriptorId {
            pub const ALL: &'static [DescriptorId] = &[$(DescriptorId::$id),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(DescriptorId::$id => stringify!($id)),*
                }
            }
        }
    };
}

descriptors!(
    BalabanJ,
    ExactMolWt,
    MolLogP,
    TPSA,
    QED,
    MolWt,
    HeavyAtomCount,
    NumHDonors,
    NumHAcceptors,
    NumRotatableBonds,
    RingCount,
    NumAromaticRings,
    FractionCSP3,
    FormalCharge,
    NumHalogens,
    NumHeteroatoms,
);

/// The five descriptors used as generation constraints, in template order.
pub const CONSTRAINT_IDS: [DescriptorId; 5] =
    [DescriptorId::BalabanJ, DescriptorId::ExactMolWt, DescriptorId::MolLogP, DescriptorId::TPSA, DescriptorId::QED];

impl fmt::Display for DescriptorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorId {
    type Err = PropsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DescriptorId::ALL
            .iter()
            .copied()
            .find(|d| d.name() == s)
            .ok_or_else(|| PropsError::UnknownDescriptorId(s.to_string()))
    }
}

impl DescriptorId {
    pub fn compute(self, mol: &Molecule) -> Result<f64, PropsError> {
        use DescriptorId::*;
        Ok(match self {
            BalabanJ => balaban_j(mol),
            ExactMolWt => exact_mol_wt(mol)?,
            MolLogP => crippen_logp(mol),
            TPSA => ertl_tpsa(mol),
            QED => qed(mol)?,
            MolWt => mol_wt(mol)?,
            HeavyAtomCount => counts::heavy_atom_count(mol) as f64,
            NumHDonors => counts::num_h_donors(mol) as f64,
            NumHAcceptors => counts::num_h_acceptors(mol) as f64,
            NumRotatableBonds => counts::num_rotatable_bonds(mol) as f64,
            RingCount => counts::ring_count(mol) as f64,
            NumAromaticRings => counts::num_aromatic_rings(mol) as f64,
            FractionCSP3 => counts::fraction_csp3(mol),
            FormalCharge => counts::formal_charge(mol) as f64,
            NumHalogens => counts::num_halogens(mol) as f64,
            NumHeteroatoms => counts::num_heteroatoms(mol) as f64,
        })
    }
}

const DEFAULT_MANIFEST: &str = include_str!("../../data/default.reg");

/// Ordered descriptor list read from a manifest (one id per line, `#`
/// comments).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    ids: Vec<DescriptorId>,
}

impl Registry {
    pub fn new(ids: Vec<DescriptorId>) -> Result<Self, PropsError> {
        if ids.is_empty() {
            return Err(PropsError::EmptyRegistry);
        }
        Ok(Registry { ids })
    }

    pub fn from_manifest(text: &str) -> Result<Self, PropsError> {
        let ids = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Registry::new(ids)
    }

    pub fn load(path: &Path) -> Result<Self, PropsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| PropsError::Io { path: path.display().to_string(), source })?;
        Registry::from_manifest(&text)
    }

    pub fn manifest(&self) -> String {
        self.ids.iter().map(|d| format!("{d}\n")).collect()
    }

    pub fn ids(&self) -> &[DescriptorId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.ids.iter().map(|d| d.name()).collect()
    }

    pub fn position(&self, id: DescriptorId) -> Option<usize> {
        self.ids.iter().position(|&d| d == id)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::from_manifest(DEFAULT_MANIFEST).expect("shipped manifest is valid")
    }
}

/// Descriptor values in registry order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl PropertyVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn descriptor_vector(mol: &Molecule, registry: &Registry) -> Result<PropertyVector, PropsError> {
    let values = registry.ids().iter().map(|d| d.compute(mol)).collect::<Result<Vec<_>, _>>()?;
    Ok(PropertyVector { names: registry.names().into_iter().map(String::from).collect(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    #[test]
    fn default_registry_covers_every_descriptor() {
        let r = Registry::default();
        assert_eq!(r.len(), DescriptorId::ALL.len());
        assert_eq!(&r.ids()[..5], &CONSTRAINT_IDS);
        assert_eq!(Registry::from_manifest(&r.manifest()).unwrap(), r);
    }

    #[test]
    fn manifest_errors() {
        assert!(matches!(Registry::from_manifest("QED\nLogS\n"), Err(PropsError::UnknownDescriptorId(id)) if id == "LogS"));
        assert!(matches!(Registry::from_manifest("# nothing\n"), Err(PropsError::EmptyRegistry)));
    }

    #[test]
    fn single_descriptor_registry() {
        let r = Registry::new(vec![DescriptorId::ExactMolWt]).unwrap();
        let v = descriptor_vector(&parse_smiles("C").unwrap(), &r).unwrap();
        assert_eq!(v.names, vec!["ExactMolWt"]);
        assert!((v.values[0] - 16.0313).abs() < 1e-4);
    }

    #[test]
    fn benzene_default_vector() {
        let v = descriptor_vector(&parse_smiles("c1ccccc1").unwrap(), &Registry::default()).unwrap();
        assert_eq!(v.get("NumHDonors"), Some(0.0));
        assert_eq!(v.get("NumAromaticRings"), Some(1.0));
        assert!(v.values.iter().all(|x| x.is_finite()));
    }
}
