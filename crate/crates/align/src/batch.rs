use molsynth_core::instruct::Triplet;
use rand::Rng;

use crate::model::{AlignModel, Seqs};
use crate::vocab::{BOS, CLS, EOS};
use crate::AlignError;

/// One triplet as token ids. Encoder inputs start with CLS; decoder
/// targets are BOS ... EOS.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub smiles: Vec<usize>,
    pub text: Vec<usize>,
    pub props: Vec<usize>,
    pub text_target: Vec<usize>,
    pub prop_target: Vec<usize>,
}

fn with_cls(body: &[usize], max_len: usize) -> Vec<usize> {
    let keep = body.len().min(max_len.saturating_sub(1));
    std::iter::once(CLS).chain(body[..keep].iter().copied()).collect()
}

fn with_bos_eos(body: &[usize], max_len: usize) -> Vec<usize> {
    let keep = body.len().min(max_len.saturating_sub(2));
    std::iter::once(BOS).chain(body[..keep].iter().copied()).chain(std::iter::once(EOS)).collect()
}

impl AlignModel {
    pub fn smiles_input(&self, smiles: &str) -> Result<Vec<usize>, AlignError> {
        Ok(with_cls(&self.vocabs.smiles.encode_smiles(smiles)?, self.config.max_len))
    }

    pub fn example(&self, t: &Triplet) -> Result<Example, AlignError> {
        let binner = &self.vocabs.binner;
        if t.properties.names != binner.names {
            return Err(AlignError::PropertyNamesMismatch { expected: binner.names.clone(), found: t.properties.names.clone() });
        }
        let words = self.vocabs.text.encode_text(&t.caption);
        let bins = binner.encode(&t.properties.values);
        let max = self.config.max_len;
        Ok(Example {
            smiles: self.smiles_input(&t.smiles)?,
            text: with_cls(&words, max),
            props: with_cls(&bins, max),
            text_target: with_bos_eos(&words, max),
            prop_target: with_bos_eos(&bins, max),
        })
    }
}

/// Padded inputs for a group of examples plus the in-batch negatives used
/// by the matching terms: row i is also paired with row `neg_t[i]`
/// (text) and `neg_p[i]` (properties).
#[derive(Debug, Clone)]
pub struct Batch {
    pub smiles: Seqs,
    pub text: Seqs,
    pub props: Seqs,
    pub text_target: Seqs,
    pub prop_target: Seqs,
    pub neg_t: Vec<usize>,
    pub neg_p: Vec<usize>,
}

impl Batch {
    pub fn new(examples: &[&Example], neg_t: Vec<usize>, neg_p: Vec<usize>) -> Batch {
        let pad = |f: fn(&Example) -> &Vec<usize>| {
            let v: Vec<&[usize]> = examples.iter().map(|e| f(e).as_slice()).collect();
            Seqs::pad(&v)
        };
        Batch {
            smiles: pad(|e| &e.smiles),
            text: pad(|e| &e.text),
            props: pad(|e| &e.props),
            text_target: pad(|e| &e.text_target),
            prop_target: pad(|e| &e.prop_target),
            neg_t,
            neg_p,
        }
    }

    /// Negatives drawn as two independent derangements.
    pub fn sampled(examples: &[&Example], rng: &mut impl Rng) -> Result<Batch, AlignError> {
        let neg_t = derangement(examples.len(), rng)?;
        let neg_p = derangement(examples.len(), rng)?;
        Ok(Batch::new(examples, neg_t, neg_p))
    }

    pub fn len(&self) -> usize {
        self.smiles.batch
    }

    pub fn is_empty(&self) -> bool {
        self.smiles.batch == 0
    }
}

/// Uniform random cyclic permutation (Sattolo), so no index maps to
/// itself.
pub fn derangement(n: usize, rng: &mut impl Rng) -> Result<Vec<usize>, AlignError> {
    if n < 2 {
        return Err(AlignError::BatchTooSmall { size: n, needed: 2 });
    }
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..i);
        p.swap(i, j);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #[test]
        fn derangements_have_no_fixed_points(n in 2usize..40, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = derangement(n, &mut rng).unwrap();
            let mut sorted = p.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            prop_assert!(p.iter().enumerate().all(|(i, &j)| i != j));
        }
    }

    #[test]
    fn framing_and_truncation() {
        assert_eq!(with_cls(&[7, 8, 9], 3), vec![CLS, 7, 8]);
        assert_eq!(with_bos_eos(&[7, 8, 9], 4), vec![BOS, 7, 8, EOS]);
        assert_eq!(with_bos_eos(&[], 4), vec![BOS, EOS]);
    }
}
