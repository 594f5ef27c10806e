//! Caption, molecule-generation, property-prediction and multi-constraint
//! generation scoring.

mod files;
mod report;
mod text;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::parse_smiles;
use crate::props::{fingerprint, tanimoto, DescriptorId, FingerprintKind, FingerprintParams, PropsError, CONSTRAINT_IDS};

pub use files::{read_constraints, read_truth, write_constraints};
pub use report::{parse_csv_report, render_report, reports_from_csv, ReportFormat};
pub use text::{
    bleu, bleu_tokens, char_tokens, levenshtein, meteor_pair, meteor_simple, rouge, rouge_pair, tokenize, BleuStats,
    RougeVariant,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{predictions} predictions but {references} references")]
    LengthMismatch { predictions: usize, references: usize },
    #[error("no pairs to evaluate")]
    EmptyInput,
    #[error("BLEU order {0} outside 1..=4")]
    InvalidOrder(usize),
    #[error("constraint row {row}: {reason}")]
    BadConstraint { row: usize, reason: String },
    #[error(transparent)]
    Props(#[from] PropsError),
}

/// One cell of a report; `None` renders as "n/a" with the reason kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: Option<f64>,
    pub reason: Option<String>,
}

impl Metric {
    pub fn new(name: &str, value: f64) -> Metric {
        Metric { name: name.to_string(), value: Some(value), reason: None }
    }

    pub fn missing(name: &str, reason: &str) -> Metric {
        Metric { name: name.to_string(), value: None, reason: Some(reason.to_string()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Row label, usually a model or run name.
    pub label: String,
    pub task: String,
    pub metrics: Vec<Metric>,
    pub evaluated: usize,
    pub skipped_invalid: usize,
    pub notes: Vec<String>,
}

impl MetricReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).and_then(|m| m.value)
    }
}

/// BLEU-2/4, METEOR and ROUGE-1/2/L for captions.
pub fn caption_metrics(pred: &[impl AsRef<str>], refs: &[impl AsRef<str>]) -> Result<MetricReport, EvalError> {
    text::check_len(pred.len(), refs.len())?;
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(MetricReport {
        label: String::new(),
        task: "caption".into(),
        metrics: vec![
            Metric::new("BLEU-2", bleu(pred, refs, 2)?),
            Metric::new("BLEU-4", bleu(pred, refs, 4)?),
            Metric::new("METEOR", meteor_simple(pred, refs)?),
            Metric::new("ROUGE-1", rouge(pred, refs, RougeVariant::One)?),
            Metric::new("ROUGE-2", rouge(pred, refs, RougeVariant::Two)?),
            Metric::new("ROUGE-L", rouge(pred, refs, RougeVariant::L)?),
        ],
        evaluated: pred.len(),
        skipped_invalid: 0,
        notes: vec!["METEOR is the exact-match variant (meteor_simple): no stemming or synonyms.".into()],
    })
}

/// Report labels of the three similarity fingerprints, in column order.
pub const FTS_COLUMNS: [(FingerprintKind, &str); 3] =
    [(FingerprintKind::MaccsLite, "MACCS FTS"), (FingerprintKind::Morgan, "Morgan FTS"), (FingerprintKind::Path, "RDKit FTS")];

/// Validity, character BLEU-4, mean Levenshtein and fingerprint Tanimoto
/// similarities for generated SMILES.
pub fn molgen_metrics(pred: &[impl AsRef<str> + Sync], refs: &[impl AsRef<str> + Sync]) -> Result<MetricReport, EvalError> {
    text::check_len(pred.len(), refs.len())?;
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = pred.len();
    let params = FingerprintParams::default();
    // per pair: (prediction parses, per-kind similarity when both parse)
    let rows: Vec<(bool, Option<[f64; 3]>)> = pred
        .par_iter()
        .zip(refs.par_iter())
        .map(|(p, r)| -> Result<_, EvalError> {
            let pm = parse_smiles(p.as_ref()).ok();
            let rm = parse_smiles(r.as_ref()).ok();
            let sims = match (&pm, &rm) {
                (Some(a), Some(b)) => {
                    let mut s = [0.0; 3];
                    for (slot, (kind, _)) in s.iter_mut().zip(FTS_COLUMNS) {
                        *slot = tanimoto(&fingerprint(a, kind, params)?, &fingerprint(b, kind, params)?)?;
                    }
                    Some(s)
                }
                _ => None,
            };
            Ok((pm.is_some(), sims))
        })
        .collect::<Result<_, _>>()?;

    let valid = rows.iter().filter(|r| r.0).count();
    let pairs: Vec<[f64; 3]> = rows.iter().filter_map(|r| r.1).collect();
    let lev: f64 = pred.iter().zip(refs).map(|(p, r)| levenshtein(p.as_ref(), r.as_ref()) as f64).sum::<f64>() / n as f64;
    let pt: Vec<Vec<String>> = pred.iter().map(|p| char_tokens(p.as_ref())).collect();
    let rt: Vec<Vec<String>> = refs.iter().map(|r| char_tokens(r.as_ref())).collect();

    let mut metrics = vec![
        Metric::new("BLEU", bleu_tokens(&pt, &rt, 4)?.score),
        Metric::new("Validity", valid as f64 / n as f64),
        Metric::new("Levenshtein", lev),
    ];
    for (k, (_, label)) in FTS_COLUMNS.iter().enumerate() {
        metrics.push(if pairs.is_empty() {
            Metric::missing(label, "no pair where both SMILES parse")
        } else {
            Metric::new(label, pairs.iter().map(|s| s[k]).sum::<f64>() / pairs.len() as f64)
        });
    }
    Ok(MetricReport {
        label: String::new(),
        task: "molgen".into(),
        metrics,
        evaluated: pairs.len(),
        skipped_invalid: n - pairs.len(),
        notes: vec![
            "BLEU is character-level BLEU-4 over SMILES strings.".into(),
            "RDKit FTS is computed with the hashed linear-path fingerprint (paths of 1-7 bonds).".into(),
            "MACCS FTS uses the maccs_lite key subset.".into(),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression {
    pub rmse: f64,
    /// `None` when every true value is equal.
    pub r2: Option<f64>,
}

pub fn regression_metrics(pred: &[f64], truth: &[f64]) -> Result<Regression, EvalError> {
    text::check_len(pred.len(), truth.len())?;
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    let all_equal = truth.iter().all(|&t| t == truth[0]);
    Ok(Regression { rmse: (ss_res / n).sqrt(), r2: (!all_equal).then(|| 1.0 - ss_res / ss_tot) })
}

const R2_UNDEFINED: &str = "all true values are equal";

fn regression_cells(prefix: &str, reg: Regression) -> [Metric; 2] {
    let rmse = Metric::new(&format!("{prefix}RMSE"), reg.rmse);
    let r2 = match reg.r2 {
        Some(v) => Metric::new(&format!("{prefix}R2"), v),
        None => Metric::missing(&format!("{prefix}R2"), R2_UNDEFINED),
    };
    [rmse, r2]
}

/// Property-prediction scoring: predictions are parsed as numbers, lines
/// that do not parse are counted as skipped.
pub fn proppred_metrics(pred: &[impl AsRef<str>], truth: &[f64]) -> Result<MetricReport, EvalError> {
    text::check_len(pred.len(), truth.len())?;
    let mut p = Vec::new();
    let mut t = Vec::new();
    for (s, &v) in pred.iter().zip(truth) {
        if let Some(x) = s.as_ref().trim().parse::<f64>().ok().filter(|x| x.is_finite()) {
            p.push(x);
            t.push(v);
        }
    }
    let skipped = pred.len() - p.len();
    let metrics = if p.is_empty() {
        vec![Metric::missing("RMSE", "no numeric prediction"), Metric::missing("R2", "no numeric prediction")]
    } else {
        regression_cells("", regression_metrics(&p, &t)?).to_vec()
    };
    Ok(MetricReport {
        label: String::new(),
        task: "proppred".into(),
        metrics,
        evaluated: p.len(),
        skipped_invalid: skipped,
        notes: vec![],
    })
}

/// Five target values in [`CONSTRAINT_IDS`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub targets: [f64; 5],
}

impl ConstraintSpec {
    pub fn new(targets: [f64; 5]) -> Result<Self, EvalError> {
        if let Some(i) = targets.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::BadConstraint { row: 0, reason: format!("{} is not finite", CONSTRAINT_IDS[i]) });
        }
        Ok(ConstraintSpec { targets })
    }

    pub fn ids() -> [DescriptorId; 5] {
        CONSTRAINT_IDS
    }
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Scores generated SMILES against their constraint rows. Invalid SMILES
/// are left out of every regression and reported as a rate. Residuals are
/// also pooled after dividing each property by the standard deviation of
/// its targets over the whole constraint set.
pub fn eval_multiconstraint(constraints: &[ConstraintSpec], generated: &[impl AsRef<str> + Sync]) -> Result<MetricReport, EvalError> {
    text::check_len(generated.len(), constraints.len())?;
    if generated.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let actual: Vec<Option<[f64; 5]>> = generated
        .par_iter()
        .map(|s| -> Result<_, EvalError> {
            let Ok(mol) = parse_smiles(s.as_ref()) else { return Ok(None) };
            let mut v = [0.0; 5];
            for (slot, id) in v.iter_mut().zip(CONSTRAINT_IDS) {
                *slot = id.compute(&mol)?;
            }
            Ok(Some(v))
        })
        .collect::<Result<_, _>>()?;
    let valid: Vec<usize> = (0..actual.len()).filter(|&i| actual[i].is_some()).collect();
    let n = generated.len();
    let invalidity = (n - valid.len()) as f64 / n as f64;
    let mut metrics = Vec::new();
    let mut notes = vec![
        "Per-property RMSE and R2 use raw values.".into(),
        "RMSE (z) pools residuals divided by each property's target standard deviation over the constraint set; RMSE (raw) pools raw residuals.".into(),
        "R2 (macro) averages the defined per-property R2 values.".into(),
    ];

    if valid.is_empty() {
        for id in CONSTRAINT_IDS {
            metrics.extend(["RMSE", "R2"].map(|m| Metric::missing(&format!("{id} {m}"), "no valid generated SMILES")));
        }
        metrics.push(Metric::missing("RMSE (raw)", "no valid generated SMILES"));
        metrics.push(Metric::missing("RMSE (z)", "no valid generated SMILES"));
        metrics.push(Metric::missing("R2 (macro)", "no valid generated SMILES"));
    } else {
        let mut r2s = Vec::new();
        let mut raw_sq = 0.0;
        let mut z_sq = 0.0;
        for (k, id) in CONSTRAINT_IDS.iter().enumerate() {
            let truth: Vec<f64> = valid.iter().map(|&i| constraints[i].targets[k]).collect();
            let pred: Vec<f64> = valid.iter().map(|&i| actual[i].unwrap()[k]).collect();
            let reg = regression_metrics(&pred, &truth)?;
            metrics.extend(regression_cells(&format!("{id} "), reg));
            r2s.extend(reg.r2);
            let (_, sd) = mean_std(constraints.iter().map(|c| c.targets[k]));
            let scale = if sd > 0.0 {
                sd
            } else {
                notes.push(format!("{id} targets have zero spread; its z residuals are left unscaled."));
                1.0
            };
            for (p, t) in pred.iter().zip(&truth) {
                raw_sq += (p - t) * (p - t);
                z_sq += ((p - t) / scale) * ((p - t) / scale);
            }
        }
        let cells = (valid.len() * CONSTRAINT_IDS.len()) as f64;
        metrics.push(Metric::new("RMSE (raw)", (raw_sq / cells).sqrt()));
        metrics.push(Metric::new("RMSE (z)", (z_sq / cells).sqrt()));
        metrics.push(if r2s.is_empty() {
            Metric::missing("R2 (macro)", R2_UNDEFINED)
        } else {
            Metric::new("R2 (macro)", r2s.iter().sum::<f64>() / r2s.len() as f64)
        });
    }
    metrics.push(Metric::new("Invalidity", invalidity));
    Ok(MetricReport {
        label: String::new(),
        task: "multiconstraint".into(),
        metrics,
        evaluated: valid.len(),
        skipped_invalid: n - valid.len(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_hand_example() {
        let r = regression_metrics(&[2.0, 4.0, 6.0], &[1.0, 5.0, 6.0]).unwrap();
        assert!((r.rmse - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r.r2.unwrap() - (1.0 - 2.0 / 14.0)).abs() < 1e-12);
        let flat = regression_metrics(&[1.0, 2.0], &[3.0, 3.0]).unwrap();
        assert_eq!(flat.r2, None);
        let mean = regression_metrics(&[4.0, 4.0, 4.0], &[3.0, 4.0, 5.0]).unwrap();
        assert_eq!(mean.r2, Some(0.0));
        assert!(matches!(regression_metrics(&[], &[]), Err(EvalError::EmptyInput)));
    }

    #[test]
    fn molgen_identity_and_invalid() {
        let s = ["CCO", "c1ccccc1O", "CC(=O)N"];
        let r = molgen_metrics(&s, &s).unwrap();
        for m in ["BLEU", "Validity", "MACCS FTS", "Morgan FTS", "RDKit FTS"] {
            assert_eq!(r.get(m), Some(1.0), "{m}");
        }
        assert_eq!(r.get("Levenshtein"), Some(0.0));

        let bad = molgen_metrics(&["C(", "X"], &["CC", "CO"]).unwrap();
        assert_eq!(bad.get("Validity"), Some(0.0));
        assert_eq!(bad.get("Morgan FTS"), None);
        assert_eq!(bad.evaluated, 0);
    }

    #[test]
    fn molgen_single_appended_atom() {
        let r = molgen_metrics(&["CCOC"], &["CCO"]).unwrap();
        assert!(r.get("Levenshtein").unwrap() >= 1.0);
        assert!(r.get("Morgan FTS").unwrap() < 1.0);
    }

    #[test]
    fn multiconstraint_residual_on_published_molecule() {
        let c = ConstraintSpec::new([2.42, 241.06, 2.46, 43.30, 0.51]).unwrap();
        let r = eval_multiconstraint(&[c], &["NN=c1sc2ccccc2n1-c1ccccc1"]).unwrap();
        assert!(r.get("ExactMolWt RMSE").unwrap() <= 0.05);
        assert_eq!(r.get("Invalidity"), Some(0.0));
        // one row: every R2 is undefined
        assert_eq!(r.get("R2 (macro)"), None);
    }

    #[test]
    fn multiconstraint_all_invalid() {
        let c = ConstraintSpec::new([1.0; 5]).unwrap();
        let r = eval_multiconstraint(&[c, c], &["C(", "[Xx]"]).unwrap();
        assert_eq!(r.get("Invalidity"), Some(1.0));
        assert_eq!(r.get("RMSE (z)"), None);
        assert_eq!(r.evaluated, 0);
    }

    #[test]
    fn proppred_skips_non_numeric() {
        let r = proppred_metrics(&["2.65", "n/a", "1.5"], &[2.66, 1.0, 1.5]).unwrap();
        assert_eq!(r.skipped_invalid, 1);
        assert!((r.get("RMSE").unwrap() - (0.0001f64 / 2.0).sqrt()).abs() < 1e-9);
    }
}
