//! The six training objectives: matching and contrastive terms between
//! the SMILES encoder and each other encoder, and the two decoders'
//! next-token losses.

use serde::{Deserialize, Serialize};

use crate::batch::Batch;
use crate::model::{mlp, AlignModel, Encoded, Memory, Seqs};
use crate::tape::{Tape, Var};
use crate::vocab::{Modality, PAD};
use crate::AlignError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossTerm {
    MatchSt,
    MatchSp,
    ContrastiveSt,
    ContrastiveSp,
    ClmSt,
    ClmSp,
}

impl LossTerm {
    pub const ALL: [LossTerm; 6] =
        [LossTerm::MatchSt, LossTerm::MatchSp, LossTerm::ContrastiveSt, LossTerm::ContrastiveSp, LossTerm::ClmSt, LossTerm::ClmSp];

    pub fn name(self) -> &'static str {
        match self {
            LossTerm::MatchSt => "match_st",
            LossTerm::MatchSp => "match_sp",
            LossTerm::ContrastiveSt => "contrastive_st",
            LossTerm::ContrastiveSp => "contrastive_sp",
            LossTerm::ClmSt => "clm_st",
            LossTerm::ClmSp => "clm_sp",
        }
    }

    fn other(self) -> Modality {
        match self {
            LossTerm::MatchSt | LossTerm::ContrastiveSt | LossTerm::ClmSt => Modality::Text,
            _ => Modality::Property,
        }
    }
}

impl std::fmt::Display for LossTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub match_st: f64,
    pub match_sp: f64,
    pub contrastive_st: f64,
    pub contrastive_sp: f64,
    pub clm_st: f64,
    pub clm_sp: f64,
    pub total: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LossBreakdown {
    pub fn components(&self) -> [f64; 6] {
        [self.match_st, self.match_sp, self.contrastive_st, self.contrastive_sp, self.clm_st, self.clm_sp]
    }
}

/// total = match_st + match_sp + alpha (contrastive_st + contrastive_sp)
/// + beta (clm_st + clm_sp), components in `LossTerm::ALL` order.
pub fn total_loss(c: [f64; 6], alpha: f64, beta: f64) -> Result<LossBreakdown, AlignError> {
    if alpha < 0.0 || beta < 0.0 || alpha.is_nan() || beta.is_nan() {
        return Err(AlignError::NegativeWeight { alpha, beta });
    }
    Ok(LossBreakdown {
        match_st: c[0],
        match_sp: c[1],
        contrastive_st: c[2],
        contrastive_sp: c[3],
        clm_st: c[4],
        clm_sp: c[5],
        total: c[0] + c[1] + alpha * (c[2] + c[3]) + beta * (c[4] + c[5]),
        alpha,
        beta,
    })
}

/// Two-way cross-entropy of the matching head on `[s_i ; o_j]` for each
/// `(i, j)` pair; label 1 means the pair is the same molecule.
pub fn match_loss(
    model: &AlignModel,
    t: &mut Tape,
    smiles: Var,
    other: Var,
    other_modality: Modality,
    pairs: &[(usize, usize)],
    labels: &[usize],
) -> Result<Var, AlignError> {
    assert_eq!(pairs.len(), labels.len(), "one label per pair");
    if let Some(&label) = labels.iter().find(|&&l| l > 1) {
        return Err(AlignError::LabelOutOfRange(label));
    }
    let si: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let oi: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let s = t.select_rows(smiles, &si);
    let o = t.select_rows(other, &oi);
    let x = t.concat_cols(s, o);
    let logits = mlp(t, model.match_head(other_modality), x);
    let targets: Vec<Option<usize>> = labels.iter().map(|&l| Some(l)).collect();
    Ok(t.cross_entropy(logits, &targets))
}

/// Positives on the diagonal plus one negative per row at `negatives[i]`.
pub fn match_pairs(negatives: &[usize]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let n = negatives.len();
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    pairs.extend(negatives.iter().enumerate().map(|(i, &j)| (i, j)));
    let labels = (0..2 * n).map(|k| usize::from(k < n)).collect();
    (pairs, labels)
}

/// Half the sum of four softmax cross-entropies over cosine similarities
/// divided by tau: SMILES to other, other to SMILES, SMILES to SMILES and
/// other to other, each with the matching row as the positive.
pub fn contrastive_loss(model: &AlignModel, t: &mut Tape, smiles: Var, other: Var, other_modality: Modality) -> Result<Var, AlignError> {
    let zs = model.project(t, Modality::Smiles, smiles);
    let zo = model.project(t, other_modality, other);
    contrastive_from_embeddings(t, zs, zo, model.config.tau)
}

/// The contrastive combination on already normalised embeddings.
pub fn contrastive_from_embeddings(t: &mut Tape, zs: Var, zo: Var, tau: f64) -> Result<Var, AlignError> {
    let m = t.value(zs).rows;
    if m < 2 {
        return Err(AlignError::BatchTooSmall { size: m, needed: 2 });
    }
    let diag: Vec<Option<usize>> = (0..m).map(Some).collect();
    let so = t.matmul_bt(zs, zo);
    let so = t.scale(so, 1.0 / tau);
    let os = t.transpose(so);
    let ss = t.matmul_bt(zs, zs);
    let ss = t.scale(ss, 1.0 / tau);
    let oo = t.matmul_bt(zo, zo);
    let oo = t.scale(oo, 1.0 / tau);
    let terms = [so, os, ss, oo].map(|sim| t.cross_entropy(sim, &diag));
    let a = t.add(terms[0], terms[1]);
    let b = t.add(terms[2], terms[3]);
    let sum = t.add(a, b);
    Ok(t.scale(sum, 0.5))
}

/// Mean next-token negative log-likelihood of `target` (BOS ... EOS,
/// PAD-filled) under the decoder, which cross-attends to the SMILES
/// encoder states.
pub fn clm_loss(
    model: &AlignModel,
    t: &mut Tape,
    smiles: &Encoded,
    smiles_seqs: &Seqs,
    target: &Seqs,
    target_modality: Modality,
) -> Result<Var, AlignError> {
    if target.len < 2 || !(0..target.batch).all(|b| target.mask[b * target.len + 1]) {
        return Err(AlignError::TargetTooShort);
    }
    let input = target.columns(0, target.len - 1);
    let next = target.columns(1, target.len);
    let memory = Memory { states: smiles.states, len: smiles_seqs.len, mask: &smiles_seqs.mask };
    let logits = model.decode(t, target_modality, &input, &memory)?;
    let targets: Vec<Option<usize>> = next.ids.iter().map(|&id| (id != PAD).then_some(id)).collect();
    Ok(t.cross_entropy(logits, &targets))
}

/// Builds the requested terms for one batch on `t`, sharing encoder
/// passes between them.
pub fn batch_losses(model: &AlignModel, t: &mut Tape, batch: &Batch, terms: &[LossTerm]) -> Result<Vec<(LossTerm, Var)>, AlignError> {
    let s = model.encode(t, Modality::Smiles, &batch.smiles)?;
    let needs = |m: Modality| terms.iter().any(|x| x.other() == m && !matches!(x, LossTerm::ClmSt | LossTerm::ClmSp));
    let enc_t = if needs(Modality::Text) { Some(model.encode(t, Modality::Text, &batch.text)?) } else { None };
    let enc_p = if needs(Modality::Property) { Some(model.encode(t, Modality::Property, &batch.props)?) } else { None };
    let mut out = Vec::with_capacity(terms.len());
    for &term in terms {
        let other = match term.other() {
            Modality::Text => enc_t,
            _ => enc_p,
        };
        let v = match term {
            LossTerm::MatchSt | LossTerm::MatchSp => {
                let neg = if term == LossTerm::MatchSt { &batch.neg_t } else { &batch.neg_p };
                let (pairs, labels) = match_pairs(neg);
                match_loss(model, t, s.pooled, other.expect("encoded").pooled, term.other(), &pairs, &labels)?
            }
            LossTerm::ContrastiveSt | LossTerm::ContrastiveSp => {
                contrastive_loss(model, t, s.pooled, other.expect("encoded").pooled, term.other())?
            }
            LossTerm::ClmSt => clm_loss(model, t, &s, &batch.smiles, &batch.text_target, Modality::Text)?,
            LossTerm::ClmSp => clm_loss(model, t, &s, &batch.smiles, &batch.prop_target, Modality::Property)?,
        };
        out.push((term, v));
    }
    Ok(out)
}

/// Weighted sum of all six terms as one tape node, plus the breakdown.
pub fn total_on_tape(model: &AlignModel, t: &mut Tape, batch: &Batch, alpha: f64, beta: f64) -> Result<(Var, LossBreakdown), AlignError> {
    let terms = batch_losses(model, t, batch, &LossTerm::ALL)?;
    let values: Vec<f64> = terms.iter().map(|(_, v)| t.value(*v).item()).collect();
    let breakdown = total_loss(values.try_into().expect("six terms"), alpha, beta)?;
    let weights = [1.0, 1.0, alpha, alpha, beta, beta];
    let mut acc: Option<Var> = None;
    for ((_, v), w) in terms.iter().zip(weights) {
        let scaled = t.scale(*v, w);
        acc = Some(match acc {
            Some(a) => t.add(a, scaled),
            None => scaled,
        });
    }
    Ok((acc.expect("six terms"), breakdown))
}
