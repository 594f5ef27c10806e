use log::{debug, info};
use molsynth_core::instruct::Triplet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::batch::{Batch, Example};
use crate::loss::{total_loss, total_on_tape, LossBreakdown};
use crate::model::{AlignModel, ParamStore, Seqs};
use crate::optim::{clip_global_norm, AdamW, AdamWConfig};
use crate::tensor::matmul_bt;
use crate::vocab::Modality;
use crate::AlignError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamWConfig,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    /// Global gradient-norm cap; `None` disables clipping.
    pub clip: Option<f64>,
    /// Decay of an exponential moving average of the weights, kept for
    /// evaluation only. Off by default.
    pub ema: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 16,
            optimizer: AdamWConfig::default(),
            seed: 0,
            alpha: 1.0,
            beta: 5.0,
            clip: Some(1.0),
            ema: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    /// Mean of each term over the batches of every epoch.
    pub history: Vec<LossBreakdown>,
    pub ema: Option<ParamStore>,
}

fn decay_mask(p: &ParamStore) -> Vec<bool> {
    p.names.iter().map(|n| n.ends_with(".w") || n.ends_with(".tok") || n.ends_with(".pos")).collect()
}

/// Contiguous chunks of `batch` indices; a trailing chunk of one is folded
/// into the previous chunk because the in-batch terms need two rows.
fn chunks(order: &[usize], batch: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(batch).collect();
    if out.len() > 1 && out.last().is_some_and(|c| c.len() < 2) {
        let n = out.len();
        let start = (n - 2) * batch;
        out.truncate(n - 2);
        out.push(&order[start..]);
    }
    out
}

/// Minibatch AdamW on the weighted six-term objective. Single-threaded,
/// so the loss history and final weights are a function of the seed.
pub fn train(model: &mut AlignModel, corpus: &[Triplet], cfg: &TrainConfig) -> Result<TrainOutput, AlignError> {
    if corpus.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    if corpus.len() < 2 {
        return Err(AlignError::BatchTooSmall { size: corpus.len(), needed: 2 });
    }
    total_loss([0.0; 6], cfg.alpha, cfg.beta)?;
    let examples = corpus.iter().map(|t| model.example(t)).collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = AdamW::new(cfg.optimizer.clone(), &model.params.tensors, decay_mask(&model.params));
    let mut ema = cfg.ema.map(|_| model.params.clone());
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sums = [0.0; 6];
        let groups = chunks(&order, cfg.batch_size.max(2));
        for idx in &groups {
            let refs: Vec<&Example> = idx.iter().map(|&i| &examples[i]).collect();
            let batch = Batch::sampled(&refs, &mut rng)?;
            let (mut grads, b) = {
                let mut t = model.tape();
                let (loss, b) = total_on_tape(model, &mut t, &batch, cfg.alpha, cfg.beta)?;
                (t.backward(loss), b)
            };
            if !b.total.is_finite() {
                return Err(AlignError::DivergedLoss { epoch: epoch + 1, value: b.total });
            }
            if let Some((i, _)) = grads.iter().enumerate().find(|(_, g)| g.as_ref().is_some_and(|g| !g.is_finite())) {
                return Err(AlignError::NonFiniteGradient(model.params.names[i].clone()));
            }
            if let Some(max) = cfg.clip {
                clip_global_norm(&mut grads, max);
            }
            opt.step(&mut model.params.tensors, &grads);
            if let (Some(e), Some(d)) = (ema.as_mut(), cfg.ema) {
                for (et, pt) in e.tensors.iter_mut().zip(&model.params.tensors) {
                    for (x, y) in et.data.iter_mut().zip(&pt.data) {
                        *x = d * *x + (1.0 - d) * y;
                    }
                }
            }
            for (s, c) in sums.iter_mut().zip(b.components()) {
                *s += c;
            }
            debug!("epoch {} batch total {:.4}", epoch + 1, b.total);
        }
        let n = groups.len() as f64;
        let b = total_loss(sums.map(|s| s / n), cfg.alpha, cfg.beta)?;
        if !b.total.is_finite() {
            return Err(AlignError::DivergedLoss { epoch: epoch + 1, value: b.total });
        }
        info!(
            "epoch {:>3}: total {:.4} | match {:.3} {:.3} | contrastive {:.3} {:.3} | clm {:.3} {:.3}",
            epoch + 1,
            b.total,
            b.match_st,
            b.match_sp,
            b.contrastive_st,
            b.contrastive_sp,
            b.clm_st,
            b.clm_sp
        );
        history.push(b);
    }
    Ok(TrainOutput { history, ema })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    S2p,
    S2t,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s2p" => Ok(Direction::S2p),
            "s2t" => Ok(Direction::S2t),
            _ => Err(format!("unknown direction '{s}' (s2p or s2t)")),
        }
    }
}

/// Joint-space similarity matrix, SMILES rows against the other modality.
pub fn similarity(model: &AlignModel, batch: &[Triplet], direction: Direction) -> Result<crate::Tensor, AlignError> {
    let examples = batch.iter().map(|t| model.example(t)).collect::<Result<Vec<_>, _>>()?;
    let (m, pick): (Modality, fn(&Example) -> &Vec<usize>) = match direction {
        Direction::S2p => (Modality::Property, |e| &e.props),
        Direction::S2t => (Modality::Text, |e| &e.text),
    };
    let s_rows: Vec<&[usize]> = examples.iter().map(|e| e.smiles.as_slice()).collect();
    let o_rows: Vec<&[usize]> = examples.iter().map(|e| pick(e).as_slice()).collect();
    let mut t = model.tape();
    let s = model.encode(&mut t, Modality::Smiles, &Seqs::pad(&s_rows))?;
    let o = model.encode(&mut t, m, &Seqs::pad(&o_rows))?;
    let zs = model.project(&mut t, Modality::Smiles, s.pooled);
    let zo = model.project(&mut t, m, o.pooled);
    Ok(matmul_bt(t.value(zs), t.value(zo)))
}

/// Fraction of rows whose own partner has the highest similarity. Ties go
/// to the lowest column index, so duplicated rows count only for the
/// first copy.
pub fn retrieval_accuracy(model: &AlignModel, batch: &[Triplet], direction: Direction) -> Result<f64, AlignError> {
    if batch.len() < 2 {
        return Err(AlignError::BatchTooSmall { size: batch.len(), needed: 2 });
    }
    let sim = similarity(model, batch, direction)?;
    let hits = (0..sim.rows).filter(|&r| argmax(sim.row(r)) == r).count();
    Ok(hits as f64 / sim.rows as f64)
}

/// First index of the maximum.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use crate::vocab::build_vocabularies;
    use molsynth_core::corpus::synthetic_corpus;
    use molsynth_core::Registry;

    fn corpus(n: usize) -> Vec<Triplet> {
        let reg = Registry::default();
        synthetic_corpus(n, 1).iter().map(|e| Triplet::from_smiles(&e.smiles, &e.caption, &reg).unwrap()).collect()
    }

    fn small(c: &[Triplet]) -> AlignModel {
        let vocabs = build_vocabularies(c, 200, 8).unwrap();
        AlignModel::new(ModelConfig { dim: 16, layers: 1, heads: 2, ff: 32, joint: 8, max_len: 96, tau: 0.07 }, vocabs, 5)
    }

    #[test]
    fn chunking_folds_a_single_trailing_row() {
        let order: Vec<usize> = (0..33).collect();
        let c = chunks(&order, 16);
        assert_eq!(c.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![16, 17]);
        let order: Vec<usize> = (0..34).collect();
        assert_eq!(chunks(&order, 16).len(), 3);
    }

    #[test]
    fn same_seed_same_history_and_zero_lr_is_flat() {
        let c = corpus(24);
        let cfg = TrainConfig { epochs: 2, batch_size: 8, seed: 9, ..Default::default() };
        let mut a = small(&c);
        let mut b = small(&c);
        let ha = train(&mut a, &c, &cfg).unwrap().history;
        let hb = train(&mut b, &c, &cfg).unwrap().history;
        assert_eq!(ha, hb);
        assert_eq!(a.params, b.params);

        let frozen = TrainConfig { epochs: 3, batch_size: 24, optimizer: AdamWConfig { lr: 0.0, ..Default::default() }, ..cfg };
        let mut m = small(&c);
        let before = m.params.clone();
        let h = train(&mut m, &c, &frozen).unwrap().history;
        assert_eq!(m.params, before);
        // one full batch per epoch: only the row order (summation order)
        // and the sampled negatives of the matching terms change
        for e in &h[1..] {
            assert!((e.contrastive_st - h[0].contrastive_st).abs() < 1e-12);
            assert!((e.contrastive_sp - h[0].contrastive_sp).abs() < 1e-12);
            assert!((e.clm_st - h[0].clm_st).abs() < 1e-12);
            assert!((e.clm_sp - h[0].clm_sp).abs() < 1e-12);
        }
    }

    #[test]
    fn untrained_retrieval_is_near_chance() {
        let c = corpus(160);
        let m = small(&c);
        let mean: f64 = c.chunks(16).map(|b| retrieval_accuracy(&m, b, Direction::S2p).unwrap()).sum::<f64>() / 10.0;
        assert!(mean < 0.3, "{mean}");
    }

    #[test]
    fn duplicated_rows_tie_to_the_first() {
        let c = corpus(3);
        let m = small(&c);
        let dup = vec![c[0].clone(), c[0].clone(), c[1].clone()];
        let sim = similarity(&m, &dup, Direction::S2t).unwrap();
        assert_eq!(sim.row(0)[0], sim.row(0)[1]);
        assert_eq!(argmax(sim.row(1)), argmax(sim.row(0)));
        assert_eq!(argmax(&[0.5, 0.5, 0.1]), 0);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let c = corpus(4);
        let mut m = small(&c);
        assert!(matches!(train(&mut m, &[], &TrainConfig::default()), Err(AlignError::EmptyCorpus)));
    }
}
