use std::collections::{BTreeMap, HashMap};

use molsynth_core::chem::tokenize_smiles;
use molsynth_core::eval::tokenize;
use molsynth_core::instruct::Triplet;
use serde::{Deserialize, Serialize};

use crate::AlignError;

pub const PAD: usize = 0;
pub const CLS: usize = 1;
pub const BOS: usize = 2;
pub const EOS: usize = 3;
pub const UNK: usize = 4;
pub const SPECIALS: [&str; 5] = ["[PAD]", "[CLS]", "[BOS]", "[EOS]", "[UNK]"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Smiles,
    Property,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    modality: Modality,
    tokens: Vec<String>,
}

/// Token table with dense ids; the five specials always occupy 0..5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    pub modality: Modality,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        let index = d.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { modality: d.modality, tokens: d.tokens, index }
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData { modality: v.modality, tokens: v.tokens }
    }
}

impl Vocabulary {
    /// Specials followed by `tokens` in the given order; duplicates and
    /// special names are dropped.
    pub fn new(modality: Modality, tokens: impl IntoIterator<Item = String>) -> Self {
        let mut all: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        let mut index: HashMap<String, usize> = all.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        for t in tokens {
            if !index.contains_key(&t) {
                index.insert(t.clone(), all.len());
                all.push(t);
            }
        }
        Vocabulary { modality, tokens: all, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode_text(&self, text: &str) -> Vec<usize> {
        tokenize(text).iter().map(|t| self.id(t)).collect()
    }

    pub fn encode_smiles(&self, smiles: &str) -> Result<Vec<usize>, AlignError> {
        let toks = tokenize_smiles(smiles).map_err(|e| AlignError::InvalidSmiles { smiles: smiles.to_string(), reason: e.to_string() })?;
        Ok(toks.iter().map(|t| self.id(&t.text)).collect())
    }

    /// Joins text tokens with spaces, gluing punctuation the way the
    /// captions are written. Specials are skipped.
    pub fn decode_text(&self, ids: &[usize]) -> String {
        let mut out = String::new();
        let mut glue_next = true;
        for &id in ids {
            if id < SPECIALS.len() {
                continue;
            }
            let Some(tok) = self.token(id) else { continue };
            let glue_left = matches!(tok, "." | "," | ";" | ":" | "!" | "?" | ")" | "-" | "'");
            if !glue_next && !glue_left {
                out.push(' ');
            }
            out.push_str(tok);
            glue_next = matches!(tok, "(" | "-" | "'");
        }
        out
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-descriptor quantile edges. A value's bin is the number of edges
/// at or below it, so values under the first edge land in bin 0 and the
/// bins cover the whole real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyBinner {
    pub names: Vec<String>,
    pub bins: usize,
    pub edges: Vec<Vec<f64>>,
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl PropertyBinner {
    /// `rows` are property vectors in `names` order. Edges sit at the
    /// i/K quantiles (linear interpolation); repeated edges collapse, so a
    /// constant descriptor gets fewer than K bins.
    pub fn fit(names: &[String], rows: &[&[f64]], bins: usize) -> Result<Self, AlignError> {
        if rows.is_empty() {
            return Err(AlignError::EmptyCorpus);
        }
        assert!(bins >= 1, "at least one bin");
        let mut edges = Vec::with_capacity(names.len());
        let mut mins = Vec::new();
        let mut maxs = Vec::new();
        for d in 0..names.len() {
            let mut col: Vec<f64> = rows.iter().map(|r| r[d]).filter(|v| v.is_finite()).collect();
            col.sort_by(f64::total_cmp);
            if col.is_empty() {
                col.push(0.0);
            }
            let mut e: Vec<f64> = Vec::with_capacity(bins - 1);
            for i in 1..bins {
                let q = quantile(&col, i as f64 / bins as f64);
                if e.last().is_none_or(|&last| q > last) {
                    e.push(q);
                }
            }
            mins.push(col[0]);
            maxs.push(col[col.len() - 1]);
            edges.push(e);
        }
        Ok(PropertyBinner { names: names.to_vec(), bins, edges, mins, maxs })
    }

    pub fn bin(&self, d: usize, value: f64) -> usize {
        self.edges[d].partition_point(|&e| e <= value)
    }

    /// Representative value of a bin: the middle of its edges, with the
    /// observed extremes closing the two end bins.
    pub fn midpoint(&self, d: usize, bin: usize) -> f64 {
        let e = &self.edges[d];
        let bin = bin.min(e.len());
        let lo = if bin == 0 { self.mins[d].min(e.first().copied().unwrap_or(self.mins[d])) } else { e[bin - 1] };
        let hi = if bin == e.len() { self.maxs[d].max(e.last().copied().unwrap_or(self.maxs[d])) } else { e[bin] };
        0.5 * (lo + hi)
    }

    pub fn token_id(&self, d: usize, bin: usize) -> usize {
        SPECIALS.len() + d * self.bins + bin
    }

    /// Inverse of `token_id`; `None` for specials or ids past the table.
    pub fn split_token(&self, id: usize) -> Option<(usize, usize)> {
        let k = id.checked_sub(SPECIALS.len())?;
        let d = k / self.bins;
        (d < self.names.len()).then_some((d, k % self.bins))
    }

    pub fn encode(&self, values: &[f64]) -> Vec<usize> {
        values.iter().enumerate().map(|(d, &v)| self.token_id(d, self.bin(d, v))).collect()
    }
}

/// The three vocabularies plus the property binner, all fitted to one
/// corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabs {
    pub text: Vocabulary,
    pub smiles: Vocabulary,
    pub property: Vocabulary,
    pub binner: PropertyBinner,
}

impl Vocabs {
    pub fn get(&self, m: Modality) -> &Vocabulary {
        match m {
            Modality::Text => &self.text,
            Modality::Smiles => &self.smiles,
            Modality::Property => &self.property,
        }
    }
}

/// Text: the `text_cap` most frequent caption tokens (ties in lexical
/// order). SMILES: every lexeme seen. Property: one token per
/// (descriptor, bin) pair, named `Descriptor:bin`.
pub fn build_vocabularies(corpus: &[Triplet], text_cap: usize, bins: usize) -> Result<Vocabs, AlignError> {
    if corpus.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut lexemes: BTreeMap<String, ()> = BTreeMap::new();
    for t in corpus {
        for tok in tokenize(&t.caption) {
            *counts.entry(tok).or_default() += 1;
        }
        let toks = tokenize_smiles(&t.smiles).map_err(|e| AlignError::InvalidSmiles { smiles: t.smiles.clone(), reason: e.to_string() })?;
        for tok in toks {
            lexemes.insert(tok.text, ());
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let text = Vocabulary::new(Modality::Text, ranked.into_iter().take(text_cap).map(|(t, _)| t));
    let smiles = Vocabulary::new(Modality::Smiles, lexemes.into_keys());

    let names = corpus[0].properties.names.clone();
    let rows: Vec<&[f64]> = corpus.iter().map(|t| t.properties.values.as_slice()).collect();
    let binner = PropertyBinner::fit(&names, &rows, bins)?;
    let property = Vocabulary::new(
        Modality::Property,
        names.iter().flat_map(|n| (0..bins).map(move |b| format!("{n}:{b}"))),
    );
    Ok(Vocabs { text, smiles, property, binner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use molsynth_core::Registry;

    fn triplet(smiles: &str, caption: &str) -> Triplet {
        Triplet::from_smiles(smiles, caption, &Registry::default()).unwrap()
    }

    #[test]
    fn single_caption_vocabulary() {
        let v = build_vocabularies(&[triplet("CCO", "the molecule is ethanol")], 100, 4).unwrap();
        assert_eq!(v.text.len(), 5 + 4);
        for w in ["the", "molecule", "is", "ethanol"] {
            assert!(v.text.contains(w));
        }
        assert_eq!(v.text.id("benzene"), UNK);
        assert!(v.smiles.contains("C") && v.smiles.contains("O"));
        assert_eq!(v.property.len(), 5 + 4 * Registry::default().len());
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(build_vocabularies(&[], 10, 4), Err(AlignError::EmptyCorpus)));
    }

    #[test]
    fn two_bins_split_at_the_median() {
        let rows: Vec<Vec<f64>> = [1.0, 2.0, 3.0, 4.0].iter().map(|&v| vec![v]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let b = PropertyBinner::fit(&["x".to_string()], &refs, 2).unwrap();
        assert_eq!(b.edges[0], vec![2.5]);
        assert_eq!(b.bin(0, -100.0), 0);
        assert_eq!(b.bin(0, 2.5), 1);
        assert_eq!(b.midpoint(0, 0), 1.75);
        assert_eq!(b.midpoint(0, 1), 3.25);
    }

    #[test]
    fn constant_column_keeps_edges_increasing() {
        let rows = vec![vec![3.0]; 10];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let b = PropertyBinner::fit(&["x".to_string()], &refs, 8).unwrap();
        assert_eq!(b.edges[0], vec![3.0]);
        assert_eq!(b.midpoint(0, b.bin(0, 3.0)), 3.0);
    }

    #[test]
    fn decode_glues_punctuation() {
        let v = Vocabulary::new(Modality::Text, ["it", "is", "a", "three", "-", "carbon", "chain", ".", ","].map(String::from));
        let ids = v.encode_text("It is a three-carbon chain, a chain.");
        assert_eq!(v.decode_text(&ids), "it is a three-carbon chain, a chain.");
    }

    #[test]
    fn vocabulary_serde_rebuilds_index() {
        let v = Vocabulary::new(Modality::Smiles, ["C", "c", "O"].map(String::from));
        let back: Vocabulary = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.id("O"), 7);
    }
}
