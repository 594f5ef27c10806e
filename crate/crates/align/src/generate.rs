use std::path::Path;

use log::warn;
use molsynth_core::instruct::Triplet;
use molsynth_core::{parse_smiles, Registry};

use crate::model::{AlignModel, Memory, Seqs};
use crate::train::argmax;
use crate::vocab::{Modality, BOS, EOS};
use crate::AlignError;

impl AlignModel {
    /// Greedy decode of up to `max_tokens` tokens after BOS, stopping at
    /// EOS. The whole prefix is re-run each step.
    fn greedy(&self, smiles: &str, target: Modality, max_tokens: usize) -> Result<Vec<usize>, AlignError> {
        parse_smiles(smiles).map_err(|e| AlignError::InvalidSmiles { smiles: smiles.to_string(), reason: e.to_string() })?;
        let input = self.smiles_input(smiles)?;
        let s_seqs = Seqs::pad(&[&input]);
        let mut prefix = vec![BOS];
        let limit = max_tokens.min(self.config.max_len.saturating_sub(1));
        while prefix.len() <= limit {
            let mut t = self.tape();
            let enc = self.encode(&mut t, Modality::Smiles, &s_seqs)?;
            let memory = Memory { states: enc.states, len: s_seqs.len, mask: &s_seqs.mask };
            let logits = self.decode(&mut t, target, &Seqs::pad(&[&prefix]), &memory)?;
            let next = argmax(t.value(logits).row(prefix.len() - 1));
            if next == EOS {
                break;
            }
            prefix.push(next);
        }
        Ok(prefix[1..].to_vec())
    }

    /// Caption of at most `max_len` tokens.
    pub fn generate_caption(&self, smiles: &str, max_len: usize) -> Result<String, AlignError> {
        let ids = self.greedy(smiles, Modality::Text, max_len)?;
        Ok(self.vocabs.text.decode_text(&ids))
    }

    /// Decoded property tokens mapped back to bin midpoints, one per
    /// descriptor in binner order; descriptors the decoder did not emit
    /// are `None`.
    pub fn generate_properties(&self, smiles: &str) -> Result<Vec<Option<f64>>, AlignError> {
        let binner = &self.vocabs.binner;
        let ids = self.greedy(smiles, Modality::Property, binner.names.len() + 1)?;
        let mut out = vec![None; binner.names.len()];
        for id in ids {
            if let Some((d, b)) = binner.split_token(id) {
                out[d].get_or_insert(binner.midpoint(d, b));
            }
        }
        Ok(out)
    }
}

pub enum CaptionSource<'a> {
    /// Greedy captions of at most `max_len` tokens.
    Model { model: &'a AlignModel, max_len: usize },
    /// One caption per line, aligned with the SMILES list.
    File(&'a Path),
}

#[derive(Debug, Clone, Default)]
pub struct Synthesis {
    pub triplets: Vec<Triplet>,
    /// (0-based input index, SMILES) of the skipped lines.
    pub skipped: Vec<(usize, String)>,
}

/// Builds triplets for `smiles`: a caption from `source` and the exact
/// descriptor vector for `registry`. Unparseable SMILES are skipped with a
/// warning and listed in the result.
pub fn synthesize_triplets(smiles: &[String], source: CaptionSource, registry: &Registry) -> Result<Synthesis, AlignError> {
    let captions: Option<Vec<String>> = match source {
        CaptionSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                if e.kind() == std::io::ErrorKind::NotFound {
                    AlignError::MissingCaptionFile(path.display().to_string())
                } else {
                    AlignError::Io { path: path.display().to_string(), source: e }
                }
            })?;
            let lines: Vec<String> = text.lines().map(str::to_string).collect();
            if lines.len() != smiles.len() {
                return Err(AlignError::CaptionCountMismatch { smiles: smiles.len(), captions: lines.len() });
            }
            Some(lines)
        }
        CaptionSource::Model { .. } => None,
    };
    let mut out = Synthesis::default();
    for (i, s) in smiles.iter().enumerate() {
        if parse_smiles(s).is_err() {
            warn!("line {}: skipping invalid SMILES '{s}'", i + 1);
            out.skipped.push((i, s.clone()));
            continue;
        }
        let caption = match (&captions, &source) {
            (Some(c), _) => c[i].clone(),
            (None, CaptionSource::Model { model, max_len }) => model.generate_caption(s, *max_len)?,
            (None, CaptionSource::File(_)) => unreachable!(),
        };
        let t = Triplet::from_smiles(s, &caption, registry).map_err(|e| AlignError::InvalidSmiles { smiles: s.clone(), reason: e.to_string() })?;
        out.triplets.push(t);
    }
    if !out.skipped.is_empty() {
        warn!("{} of {} SMILES skipped as invalid", out.skipped.len(), smiles.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use crate::vocab::build_vocabularies;
    use molsynth_core::descriptor_vector;
    use std::io::Write;

    fn model() -> AlignModel {
        let reg = Registry::default();
        let c = vec![Triplet::from_smiles("CCO", "ethanol is an alcohol.", &reg).unwrap()];
        AlignModel::new(ModelConfig::toy(), build_vocabularies(&c, 20, 4).unwrap(), 1)
    }

    #[test]
    fn decoding_is_deterministic_and_bounded() {
        let m = model();
        let a = m.generate_caption("CCO", 5).unwrap();
        assert_eq!(a, m.generate_caption("CCO", 5).unwrap());
        assert!(m.greedy("CCO", Modality::Text, 5).unwrap().len() <= 5);
        assert!(m.greedy("CCO", Modality::Text, 0).unwrap().is_empty());
        assert!(matches!(m.generate_caption("C1CC", 5), Err(AlignError::InvalidSmiles { .. })));
    }

    #[test]
    fn file_captions_and_exact_properties() {
        let reg = Registry::default();
        let smiles: Vec<String> = ["CCO", "c1ccccc1", "CC(=O)O", "CCN", "CCCC", "OCCO", "C1CCCCC1", "CC#N", "CS", "CCl"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for i in 0..10 {
            writeln!(f, "caption {i}").unwrap();
        }
        let out = synthesize_triplets(&smiles, CaptionSource::File(f.path()), &reg).unwrap();
        assert_eq!(out.triplets.len(), 10);
        for (t, s) in out.triplets.iter().zip(&smiles) {
            let want = descriptor_vector(&parse_smiles(s).unwrap(), &reg).unwrap();
            assert_eq!(t.properties, want);
        }
        assert_eq!(out.triplets[3].caption, "caption 3");
    }

    #[test]
    fn invalid_lines_are_skipped_and_counted() {
        let reg = Registry::default();
        let smiles: Vec<String> = ["CCO", "C1CC", "CCN"].iter().map(|s| s.to_string()).collect();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\nb\nc").unwrap();
        let out = synthesize_triplets(&smiles, CaptionSource::File(f.path()), &reg).unwrap();
        assert_eq!(out.triplets.len(), 2);
        assert_eq!(out.skipped, vec![(1, "C1CC".to_string())]);
    }

    #[test]
    fn empty_corpus_and_missing_file() {
        let reg = Registry::default();
        let m = model();
        let out = synthesize_triplets(&[], CaptionSource::Model { model: &m, max_len: 8 }, &reg).unwrap();
        assert!(out.triplets.is_empty() && out.skipped.is_empty());
        let r = synthesize_triplets(&["CCO".into()], CaptionSource::File(Path::new("/nonexistent/captions.txt")), &reg);
        assert!(matches!(r, Err(AlignError::MissingCaptionFile(_))));
    }
}
