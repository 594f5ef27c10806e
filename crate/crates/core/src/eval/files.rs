//! Readers for the evaluation input files: constraint tables and
//! property-prediction truth files.

use std::io::{Read, Write};

use super::{ConstraintSpec, EvalError};
use crate::props::CONSTRAINT_IDS;

fn bad(row: usize, reason: impl Into<String>) -> EvalError {
    EvalError::BadConstraint { row, reason: reason.into() }
}

/// Constraint CSV: a header naming the five constraint descriptors (any
/// order; other columns such as `smiles` are ignored), then one row per
/// target. Rows are numbered from 1 after the header.
pub fn read_constraints<R: Read>(reader: R) -> Result<Vec<ConstraintSpec>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| bad(0, e.to_string()))?.clone();
    let mut cols = [0usize; 5];
    for (slot, id) in cols.iter_mut().zip(CONSTRAINT_IDS) {
        *slot = header.iter().position(|h| h == id.name()).ok_or_else(|| bad(0, format!("header lacks column {id}")))?;
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| bad(row, e.to_string()))?;
        let mut targets = [0.0; 5];
        for (k, &c) in cols.iter().enumerate() {
            let cell = rec.get(c).ok_or_else(|| bad(row, format!("missing {} value", CONSTRAINT_IDS[k])))?;
            targets[k] = cell.parse().map_err(|_| bad(row, format!("{} value '{cell}' is not a number", CONSTRAINT_IDS[k])))?;
        }
        out.push(ConstraintSpec::new(targets).map_err(|e| match e {
            EvalError::BadConstraint { reason, .. } => bad(row, reason),
            other => other,
        })?);
    }
    Ok(out)
}

/// Writes the five columns with full precision, optionally preceded by a
/// `smiles` column.
pub fn write_constraints<W: Write>(writer: W, rows: &[ConstraintSpec], smiles: Option<&[String]>) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| bad(0, e.to_string());
    let mut header: Vec<&str> = Vec::new();
    if smiles.is_some() {
        header.push("smiles");
    }
    header.extend(CONSTRAINT_IDS.iter().map(|d| d.name()));
    w.write_record(&header).map_err(io)?;
    for (i, r) in rows.iter().enumerate() {
        let mut rec: Vec<String> = Vec::new();
        if let Some(s) = smiles {
            rec.push(s[i].clone());
        }
        rec.extend(r.targets.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| bad(0, e.to_string()))?;
    Ok(())
}

/// `smiles,value` truth file for property prediction. A header row is
/// skipped when its value column is not numeric.
pub fn read_truth<R: Read>(reader: R) -> Result<Vec<(String, f64)>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(i + 1, e.to_string()))?;
        if rec.len() != 2 {
            return Err(bad(i + 1, format!("expected 'smiles,value', found {} fields", rec.len())));
        }
        match rec[1].parse::<f64>() {
            Ok(v) => out.push((rec[0].to_string(), v)),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(bad(i + 1, format!("value '{}' is not a number", &rec[1]))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraints_round_trip_and_extra_columns() {
        let rows = vec![ConstraintSpec::new([1.68, 492.2, 3.14, 138.76, 0.33]).unwrap()];
        let mut buf = Vec::new();
        write_constraints(&mut buf, &rows, Some(&["CCO".to_string()])).unwrap();
        assert_eq!(read_constraints(buf.as_slice()).unwrap(), rows);
        let reordered = "QED,TPSA,note,MolLogP,ExactMolWt,BalabanJ\n0.33,138.76,x,3.14,492.2,1.68\n";
        assert_eq!(read_constraints(reordered.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn constraint_errors_name_the_row() {
        let missing = "BalabanJ,ExactMolWt,MolLogP,TPSA\n1,2,3,4\n";
        assert!(matches!(read_constraints(missing.as_bytes()), Err(EvalError::BadConstraint { row: 0, .. })));
        let bad_cell = "BalabanJ,ExactMolWt,MolLogP,TPSA,QED\n1,2,3,4,5\n1,2,x,4,5\n";
        assert!(matches!(read_constraints(bad_cell.as_bytes()), Err(EvalError::BadConstraint { row: 2, .. })));
        let nan = "BalabanJ,ExactMolWt,MolLogP,TPSA,QED\n1,2,NaN,4,5\n";
        assert!(matches!(read_constraints(nan.as_bytes()), Err(EvalError::BadConstraint { row: 1, .. })));
    }

    #[test]
    fn truth_with_and_without_header() {
        let t = read_truth("smiles,value\nCCO,-0.0014\nc1ccccc1,1.6866\n".as_bytes()).unwrap();
        assert_eq!(t, vec![("CCO".into(), -0.0014), ("c1ccccc1".into(), 1.6866)]);
        assert_eq!(read_truth("CCO,1\n".as_bytes()).unwrap().len(), 1);
        assert!(read_truth("CCO,1\nCC,x\n".as_bytes()).is_err());
    }
}
