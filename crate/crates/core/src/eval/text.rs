use std::collections::HashMap;
use std::hash::Hash;

use super::EvalError;

/// Lowercases and splits on whitespace; each punctuation character becomes
/// its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars().flat_map(char::to_lowercase) {
        if ch.is_alphanumeric() {
            word.push(ch);
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !ch.is_whitespace() {
            out.push(ch.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// One token per character, for SMILES strings.
pub fn char_tokens(text: &str) -> Vec<String> {
    text.chars().map(String::from).collect()
}

pub(crate) fn check_len(pred: usize, refs: usize) -> Result<(), EvalError> {
    if pred != refs {
        return Err(EvalError::LengthMismatch { predictions: pred, references: refs });
    }
    Ok(())
}

fn ngram_counts<T: Eq + Hash>(toks: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut m = HashMap::new();
    if toks.len() >= n {
        for w in toks.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Clipped matches and total candidate n-grams of one order.
fn overlap<T: Eq + Hash>(pred: &[T], reference: &[T], n: usize) -> (usize, usize) {
    let p = ngram_counts(pred, n);
    let r = ngram_counts(reference, n);
    let matched = p.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum();
    (matched, pred.len().saturating_sub(n - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuStats {
    /// Modified precisions for orders 1..=n, after smoothing.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub score: f64,
}

/// Corpus BLEU over pre-tokenized pairs. Orders 2..=n with zero matches
/// get add-one smoothing: (0 + 1) / (total + 1).
pub fn bleu_tokens<T: Eq + Hash>(pred: &[Vec<T>], refs: &[Vec<T>], n: usize) -> Result<BleuStats, EvalError> {
    check_len(pred.len(), refs.len())?;
    let mut matched = vec![0usize; n];
    let mut total = vec![0usize; n];
    for (p, r) in pred.iter().zip(refs) {
        for k in 1..=n {
            let (m, t) = overlap(p, r, k);
            matched[k - 1] += m;
            total[k - 1] += t;
        }
    }
    let c: usize = pred.iter().map(Vec::len).sum();
    let r: usize = refs.iter().map(Vec::len).sum();
    let brevity_penalty = if c == 0 {
        0.0
    } else if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    let precisions: Vec<f64> = (0..n)
        .map(|k| {
            if total[k] == 0 && k == 0 {
                0.0
            } else if matched[k] == 0 && k > 0 {
                1.0 / (total[k] as f64 + 1.0)
            } else {
                matched[k] as f64 / total[k] as f64
            }
        })
        .collect();
    let score = if precisions.iter().any(|&p| p == 0.0) || brevity_penalty == 0.0 {
        0.0
    } else {
        brevity_penalty * (precisions.iter().map(|p| p.ln()).sum::<f64>() / n as f64).exp()
    };
    Ok(BleuStats { precisions, brevity_penalty, score })
}

fn tokenize_all(texts: &[impl AsRef<str>]) -> Vec<Vec<String>> {
    texts.iter().map(|t| tokenize(t.as_ref())).collect()
}

/// Corpus BLEU-n on word tokens.
pub fn bleu(pred: &[impl AsRef<str>], refs: &[impl AsRef<str>], n: usize) -> Result<f64, EvalError> {
    if !(1..=4).contains(&n) {
        return Err(EvalError::InvalidOrder(n));
    }
    Ok(bleu_tokens(&tokenize_all(pred), &tokenize_all(refs), n)?.score)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RougeVariant {
    One,
    Two,
    L,
}

fn f1(hits: usize, p_len: usize, r_len: usize) -> f64 {
    if hits == 0 {
        return 0.0;
    }
    let p = hits as f64 / p_len as f64;
    let r = hits as f64 / r_len as f64;
    2.0 * p * r / (p + r)
}

fn lcs<T: Eq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE F1 of one tokenized pair. Pairs too short to hold any n-gram
/// score 1 when identical and 0 otherwise.
pub fn rouge_pair<T: Eq + Hash>(pred: &[T], reference: &[T], variant: RougeVariant) -> f64 {
    match variant {
        RougeVariant::L => {
            if pred.is_empty() && reference.is_empty() {
                return 1.0;
            }
            f1(lcs(pred, reference), pred.len(), reference.len())
        }
        RougeVariant::One | RougeVariant::Two => {
            let n = if variant == RougeVariant::One { 1 } else { 2 };
            let (hits, p_len) = overlap(pred, reference, n);
            let r_len = reference.len().saturating_sub(n - 1);
            if p_len == 0 && r_len == 0 {
                return if pred == reference { 1.0 } else { 0.0 };
            }
            f1(hits, p_len, r_len)
        }
    }
}

/// Mean per-pair ROUGE F1.
pub fn rouge(pred: &[impl AsRef<str>], refs: &[impl AsRef<str>], variant: RougeVariant) -> Result<f64, EvalError> {
    check_len(pred.len(), refs.len())?;
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let s: f64 = tokenize_all(pred).iter().zip(tokenize_all(refs).iter()).map(|(p, r)| rouge_pair(p, r, variant)).sum();
    Ok(s / pred.len() as f64)
}

/// Exact-match METEOR for one pair. Each prediction token aligns to the
/// earliest unused equal reference token; chunks are runs contiguous in
/// both sequences.
pub fn meteor_pair<T: Eq>(pred: &[T], reference: &[T]) -> f64 {
    let mut used = vec![false; reference.len()];
    let mut align: Vec<(usize, usize)> = Vec::new();
    for (i, t) in pred.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && reference[j] == *t) {
            used[j] = true;
            align.push((i, j));
        }
    }
    let m = align.len();
    if m == 0 {
        return 0.0;
    }
    let chunks = 1 + align.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count();
    let p = m as f64 / pred.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let f = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
    f * (1.0 - penalty)
}

pub fn meteor_simple(pred: &[impl AsRef<str>], refs: &[impl AsRef<str>]) -> Result<f64, EvalError> {
    check_len(pred.len(), refs.len())?;
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let s: f64 = tokenize_all(pred).iter().zip(tokenize_all(refs).iter()).map(|(p, r)| meteor_pair(p, r)).sum();
    Ok(s / pred.len() as f64)
}

/// Character edit distance (insert, delete, substitute), two-row DP.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(tokenize("The molecule is X-ray, ok."), ["the", "molecule", "is", "x", "-", "ray", ",", "ok", "."]);
        assert!(tokenize("  ").is_empty());
    }

    #[test]
    fn bleu_identity_and_empty() {
        let s = ["the cat sat on the mat", "a b"];
        assert_eq!(bleu(&s, &s, 4).unwrap(), 1.0);
        assert_eq!(bleu(&s, &s, 2).unwrap(), 1.0);
        assert_eq!(bleu(&[""], &["the cat"], 2).unwrap(), 0.0);
        assert!(matches!(bleu(&["a"], &["a", "b"], 2), Err(EvalError::LengthMismatch { .. })));
    }

    #[test]
    fn bleu_clips_repeated_unigrams() {
        let p = vec![tokenize("the the the")];
        let r = vec![tokenize("the cat")];
        let st = bleu_tokens(&p, &r, 2).unwrap();
        assert_eq!(st.precisions[0], 1.0 / 3.0);
        // no bigram matches: smoothed to 1 / (2 + 1)
        assert_eq!(st.precisions[1], 1.0 / 3.0);
        assert_eq!(st.brevity_penalty, 1.0);
        assert!((st.score - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_brevity_penalty() {
        let st = bleu_tokens(&[tokenize("a b")], &[tokenize("a b c d")], 1).unwrap();
        assert!((st.brevity_penalty - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn rouge_l_lcs_example() {
        assert_eq!(rouge(&["a b c d"], &["a c b d"], RougeVariant::L).unwrap(), 0.75);
        for v in [RougeVariant::One, RougeVariant::Two, RougeVariant::L] {
            assert_eq!(rouge(&["x y z", "q"], &["x y z", "q"], v).unwrap(), 1.0);
            assert_eq!(rouge(&["x y z"], &["a b c"], v).unwrap(), 0.0);
        }
    }

    #[test]
    fn meteor_formula() {
        // identical "a b c": m = 3, F = 1, one chunk
        let want = 1.0 - 0.5 * (1.0f64 / 3.0).powi(3);
        assert!((meteor_simple(&["a b c"], &["a b c"]).unwrap() - want).abs() < 1e-15);
        assert_eq!(meteor_simple(&["a b"], &["c d"]).unwrap(), 0.0);
        // one shared token out of 2 and 3: P = 1/2, R = 1/3, penalty 0.5
        let (p, r) = (0.5, 1.0 / 3.0);
        let want = 10.0 * p * r / (r + 9.0 * p) * 0.5;
        assert!((meteor_simple(&["a x"], &["y a z"]).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn meteor_counts_chunks() {
        // matches a->0, b->1 contiguous, d->3 after a gap: two chunks
        let p = tokenize("a b d");
        let r = tokenize("a b c d");
        let (pr, rc) = (1.0, 0.75);
        let f = 10.0 * pr * rc / (rc + 9.0 * pr);
        let want = f * (1.0 - 0.5 * (2.0f64 / 3.0).powi(3));
        assert!((meteor_pair(&p, &r) - want).abs() < 1e-15);
    }

    #[test]
    fn levenshtein_cases() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("same", "same"), 0);
        assert_eq!(levenshtein("flaw", "lawn"), 2);
    }
}
