//! Text-SMILES-properties triplets and their expansion into instruction
//! records for four tasks.

mod split;
mod synth;
mod template;

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{parse_smiles, write_smiles, ChemError};
use crate::props::{descriptor_vector, DescriptorId, PropertyVector, PropsError, Registry};

pub use split::{split_dataset, DatasetSplit};
pub use synth::{read_jsonl, synthesize_dataset, write_jsonl, SynthConfig};
pub use template::{fill_template, format_value, parse_instruction, Parsed, Task, InstructionRecord};

#[derive(Debug, Error)]
pub enum InstructError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("line {line}: invalid SMILES '{smiles}': {source}")]
    InvalidSmilesRow { line: u64, smiles: String, source: ChemError },
    #[error("property '{0}' is not in the triplet's property vector")]
    UnknownProperty(String),
    #[error("constraint property '{0}' missing from the registry")]
    MissingConstraintProperty(&'static str),
    #[error("task {task}: {requested} records requested, only {available} distinct (triplet, template) pairs")]
    InsufficientTriplets { task: Task, requested: usize, available: usize },
    #[error("{0} records given, at least 10 are needed for an 8:1:1 split")]
    TooFewRecords(usize),
    #[error("unknown task '{0}'")]
    UnknownTask(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Props(#[from] PropsError),
}

/// One molecule's caption, canonical SMILES and descriptor values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub smiles: String,
    pub caption: String,
    pub properties: PropertyVector,
}

impl Triplet {
    /// Canonicalizes `smiles` and computes every registry descriptor.
    pub fn from_smiles(smiles: &str, caption: &str, registry: &Registry) -> Result<Triplet, TripletError> {
        let mol = parse_smiles(smiles)?;
        let properties = descriptor_vector(&mol, registry)?;
        Ok(Triplet { smiles: write_smiles(&mol), caption: caption.to_string(), properties })
    }

    pub fn property(&self, id: DescriptorId) -> Option<f64> {
        self.properties.get(id.name())
    }
}

#[derive(Debug, Error)]
pub enum TripletError {
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error(transparent)]
    Props(#[from] PropsError),
}

/// Result of reading a triplet CSV: rows with unparseable SMILES are
/// skipped and their line numbers kept.
#[derive(Debug, Clone, Default)]
pub struct LoadedTriplets {
    pub triplets: Vec<Triplet>,
    pub invalid_lines: Vec<u64>,
}

fn io_err(path: &Path, source: std::io::Error) -> InstructError {
    InstructError::Io { path: path.display().to_string(), source }
}

fn header_ids(header: &csv::StringRecord, expected: Option<&Registry>) -> Result<Vec<String>, InstructError> {
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 3 || cols[0] != "smiles" || cols[1] != "text" {
        return Err(InstructError::HeaderMismatch(format!(
            "expected 'smiles,text,<descriptor ids>', found '{}'",
            cols.join(",")
        )));
    }
    let ids = &cols[2..];
    let mut seen = HashSet::new();
    for id in ids {
        if id.parse::<DescriptorId>().is_err() {
            return Err(InstructError::HeaderMismatch(format!("unknown descriptor column '{id}'")));
        }
        if !seen.insert(*id) {
            return Err(InstructError::HeaderMismatch(format!("duplicate column '{id}'")));
        }
    }
    if let Some(reg) = expected {
        if reg.names() != ids {
            return Err(InstructError::HeaderMismatch(format!(
                "columns {} differ from registry {}",
                ids.join(","),
                reg.names().join(",")
            )));
        }
    }
    Ok(ids.iter().map(|s| s.to_string()).collect())
}

/// Reads `smiles,text,<ids...>` rows. When `expected` is given the
/// descriptor columns must equal its ids in order.
pub fn load_triplets(path: &Path, expected: Option<&Registry>) -> Result<LoadedTriplets, InstructError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_triplets(file, expected)
}

pub fn read_triplets<R: std::io::Read>(reader: R, expected: Option<&Registry>) -> Result<LoadedTriplets, InstructError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let names = header_ids(rdr.headers()?, expected)?;
    let width = names.len() + 2;
    let mut out = LoadedTriplets::default();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != width {
            return Err(InstructError::MalformedRow {
                line,
                reason: format!("{} fields, header has {width}", row.len()),
            });
        }
        let smiles = &row[0];
        let caption = &row[1];
        if caption.trim().is_empty() {
            return Err(InstructError::MalformedRow { line, reason: "empty caption".into() });
        }
        let mut values = Vec::with_capacity(names.len());
        for (name, field) in names.iter().zip(row.iter().skip(2)) {
            let v: f64 = field
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| InstructError::MalformedRow { line, reason: format!("{name}: not a finite number '{field}'") })?;
            values.push(v);
        }
        if let Err(e) = parse_smiles(smiles) {
            log::warn!("{}", InstructError::InvalidSmilesRow { line, smiles: smiles.to_string(), source: e });
            out.invalid_lines.push(line);
            continue;
        }
        out.triplets.push(Triplet {
            smiles: smiles.to_string(),
            caption: caption.to_string(),
            properties: PropertyVector { names: names.clone(), values },
        });
    }
    if !out.invalid_lines.is_empty() {
        log::warn!("skipped {} rows with invalid SMILES", out.invalid_lines.len());
    }
    Ok(out)
}

/// Writes triplets with a `smiles,text,<ids>` header. Values use the
/// shortest representation that reads back to the same float.
pub fn save_triplets(path: &Path, triplets: &[Triplet]) -> Result<(), InstructError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_triplets(file, triplets)
}

pub fn write_triplets<W: std::io::Write>(writer: W, triplets: &[Triplet]) -> Result<(), InstructError> {
    let Some(first) = triplets.first() else {
        return Err(InstructError::HeaderMismatch("no triplets to derive a header from".into()));
    };
    let names = &first.properties.names;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["smiles", "text"];
    header.extend(names.iter().map(String::as_str));
    w.write_record(&header)?;
    for t in triplets {
        if &t.properties.names != names {
            return Err(InstructError::HeaderMismatch(format!("triplet {} has different property columns", t.smiles)));
        }
        let mut rec = vec![t.smiles.clone(), t.caption.clone()];
        rec.extend(t.properties.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| InstructError::Io { path: "<triplet writer>".into(), source: e })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> Registry {
        Registry::new(vec![DescriptorId::ExactMolWt, DescriptorId::MolLogP]).unwrap()
    }

    #[test]
    fn three_rows_load() {
        let csv = "smiles,text,ExactMolWt,MolLogP\nCCO,The molecule is ethanol.,46.04,-0.0014\nC,methane,16.03,0.6\nc1ccccc1,\"benzene, aromatic\",78.05,1.69\n";
        let t = read_triplets(csv.as_bytes(), Some(&reg())).unwrap();
        assert_eq!(t.triplets.len(), 3);
        assert_eq!(t.triplets[2].caption, "benzene, aromatic");
        assert_eq!(t.triplets[0].property(DescriptorId::MolLogP), Some(-0.0014));
    }

    #[test]
    fn missing_column_is_malformed() {
        let csv = "smiles,text,ExactMolWt,MolLogP\nCCO,ethanol,46.04\n";
        assert!(matches!(read_triplets(csv.as_bytes(), None), Err(InstructError::MalformedRow { line: 2, .. })));
    }

    #[test]
    fn header_checks() {
        let bad = "smi,text,ExactMolWt\nC,m,16\n";
        assert!(matches!(read_triplets(bad.as_bytes(), None), Err(InstructError::HeaderMismatch(_))));
        let unknown = "smiles,text,LogS\nC,m,1\n";
        assert!(matches!(read_triplets(unknown.as_bytes(), None), Err(InstructError::HeaderMismatch(_))));
        let order = "smiles,text,MolLogP,ExactMolWt\nC,m,1,2\n";
        assert!(matches!(read_triplets(order.as_bytes(), Some(&reg())), Err(InstructError::HeaderMismatch(_))));
    }

    #[test]
    fn invalid_smiles_rows_are_skipped() {
        let csv = "smiles,text,ExactMolWt\nC1CC,bad ring,1\nCC,ethane,30.05\nC(,bad paren,2\n";
        let t = read_triplets(csv.as_bytes(), None).unwrap();
        assert_eq!(t.triplets.len(), 1);
        assert_eq!(t.invalid_lines, vec![2, 4]);
    }

    #[test]
    fn save_then_load_round_trips() {
        let reg = Registry::default();
        let ts: Vec<Triplet> = [("OCC", "The molecule is ethanol."), ("c1ccncc1", "pyridine, \"quoted\"")]
            .iter()
            .map(|(s, c)| Triplet::from_smiles(s, c, &reg).unwrap())
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        save_triplets(&path, &ts).unwrap();
        let back = load_triplets(&path, Some(&reg)).unwrap();
        assert_eq!(back.triplets, ts);
        assert!(back.invalid_lines.is_empty());
    }
}
