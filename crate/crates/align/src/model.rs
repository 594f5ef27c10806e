//! Three pre-LN transformer encoders (SMILES, text, property), two decoders
//! that cross-attend to the SMILES encoder, projection heads for the
//! contrastive terms and two matching heads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::tape::{AttnSpec, Tape, Var};
use crate::tensor::Tensor;
use crate::vocab::{Modality, Vocabs, PAD};
use crate::AlignError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dim: usize,
    pub layers: usize,
    pub heads: usize,
    pub ff: usize,
    /// Width of the shared space the projection heads map into.
    pub joint: usize,
    /// Longest sequence, specials included; longer inputs are truncated.
    pub max_len: usize,
    /// Softmax temperature of the contrastive terms. Held fixed.
    pub tau: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { dim: 64, layers: 2, heads: 4, ff: 128, joint: 32, max_len: 128, tau: 0.07 }
    }
}

impl ModelConfig {
    /// Sizes used by the gradient checks.
    pub fn toy() -> Self {
        ModelConfig { dim: 8, layers: 1, heads: 2, ff: 16, joint: 8, max_len: 24, tau: 0.07 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    pub names: Vec<String>,
    pub tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn count(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::is_finite)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Norm {
    pub gain: usize,
    pub bias: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Mlp {
    pub l1: Linear,
    pub l2: Linear,
}

#[derive(Debug, Clone, Copy)]
pub struct Attn {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub ln_self: Norm,
    pub self_attn: Attn,
    /// Decoder blocks only.
    pub cross: Option<(Norm, Attn)>,
    pub ln_ff: Norm,
    pub ff: Mlp,
}

#[derive(Debug, Clone)]
pub struct Stack {
    pub tok: usize,
    pub pos: usize,
    pub blocks: Vec<Block>,
    pub ln_out: Norm,
    /// Decoders project back onto their vocabulary.
    pub out: Option<Linear>,
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub enc_s: Stack,
    pub enc_t: Stack,
    pub enc_p: Stack,
    pub dec_t: Stack,
    pub dec_p: Stack,
    pub proj_s: Mlp,
    pub proj_t: Mlp,
    pub proj_p: Mlp,
    pub match_st: Mlp,
    pub match_sp: Mlp,
}

struct Builder {
    store: ParamStore,
    rng: Option<ChaCha8Rng>,
}

impl Builder {
    fn tensor(&mut self, name: String, rows: usize, cols: usize, std: f64, fill: f64) -> usize {
        let mut t = Tensor::zeros(rows, cols);
        match (&mut self.rng, std > 0.0) {
            (Some(rng), true) => {
                let n = Normal::new(0.0, std).expect("positive std");
                t.data.iter_mut().for_each(|x| *x = n.sample(rng));
            }
            _ => t.data.iter_mut().for_each(|x| *x = fill),
        }
        self.store.names.push(name);
        self.store.tensors.push(t);
        self.store.tensors.len() - 1
    }

    fn linear(&mut self, name: &str, fan_in: usize, fan_out: usize) -> Linear {
        let w = self.tensor(format!("{name}.w"), fan_in, fan_out, 1.0 / (fan_in as f64).sqrt(), 0.0);
        let b = self.tensor(format!("{name}.b"), 1, fan_out, 0.0, 0.0);
        Linear { w, b }
    }

    fn norm(&mut self, name: &str, dim: usize) -> Norm {
        let gain = self.tensor(format!("{name}.gain"), 1, dim, 0.0, 1.0);
        let bias = self.tensor(format!("{name}.bias"), 1, dim, 0.0, 0.0);
        Norm { gain, bias }
    }

    fn mlp(&mut self, name: &str, d_in: usize, d_hidden: usize, d_out: usize) -> Mlp {
        Mlp { l1: self.linear(&format!("{name}.0"), d_in, d_hidden), l2: self.linear(&format!("{name}.1"), d_hidden, d_out) }
    }

    fn attn(&mut self, name: &str, d: usize) -> Attn {
        Attn {
            q: self.linear(&format!("{name}.q"), d, d),
            k: self.linear(&format!("{name}.k"), d, d),
            v: self.linear(&format!("{name}.v"), d, d),
            o: self.linear(&format!("{name}.o"), d, d),
        }
    }

    fn stack(&mut self, name: &str, c: &ModelConfig, vocab: usize, decoder: bool) -> Stack {
        let tok = self.tensor(format!("{name}.tok"), vocab, c.dim, 0.5, 0.0);
        let pos = self.tensor(format!("{name}.pos"), c.max_len, c.dim, 0.5, 0.0);
        let blocks = (0..c.layers)
            .map(|l| {
                let p = format!("{name}.{l}");
                Block {
                    ln_self: self.norm(&format!("{p}.ln_self"), c.dim),
                    self_attn: self.attn(&format!("{p}.self"), c.dim),
                    cross: decoder.then(|| (self.norm(&format!("{p}.ln_cross"), c.dim), self.attn(&format!("{p}.cross"), c.dim))),
                    ln_ff: self.norm(&format!("{p}.ln_ff"), c.dim),
                    ff: self.mlp(&format!("{p}.ff"), c.dim, c.ff, c.dim),
                }
            })
            .collect();
        let ln_out = self.norm(&format!("{name}.ln_out"), c.dim);
        let out = decoder.then(|| self.linear(&format!("{name}.out"), c.dim, vocab));
        Stack { tok, pos, blocks, ln_out, out }
    }
}

/// Builds the parameter layout. With a seed the tensors are randomly
/// initialised (linear weights N(0, 1/fan_in), embeddings N(0, 0.25),
/// norms at identity); without one they are placeholders to be filled from
/// a checkpoint.
pub fn build_layout(c: &ModelConfig, vocabs: &Vocabs, seed: Option<u64>) -> (Layout, ParamStore) {
    assert!(c.dim % c.heads == 0, "dim must be divisible by heads");
    let mut b = Builder { store: ParamStore { names: Vec::new(), tensors: Vec::new() }, rng: seed.map(ChaCha8Rng::seed_from_u64) };
    let layout = Layout {
        enc_s: b.stack("enc_s", c, vocabs.smiles.len(), false),
        enc_t: b.stack("enc_t", c, vocabs.text.len(), false),
        enc_p: b.stack("enc_p", c, vocabs.property.len(), false),
        dec_t: b.stack("dec_t", c, vocabs.text.len(), true),
        dec_p: b.stack("dec_p", c, vocabs.property.len(), true),
        proj_s: b.mlp("proj_s", c.dim, c.dim, c.joint),
        proj_t: b.mlp("proj_t", c.dim, c.dim, c.joint),
        proj_p: b.mlp("proj_p", c.dim, c.dim, c.joint),
        match_st: b.mlp("match_st", 2 * c.dim, c.dim, 2),
        match_sp: b.mlp("match_sp", 2 * c.dim, c.dim, 2),
    };
    (layout, b.store)
}

/// A padded batch of token sequences, row-major by sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Seqs {
    pub batch: usize,
    pub len: usize,
    pub ids: Vec<usize>,
    pub mask: Vec<bool>,
}

impl Seqs {
    /// Pads every sequence with PAD to the longest one.
    pub fn pad(seqs: &[&[usize]]) -> Seqs {
        let len = seqs.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut ids = Vec::with_capacity(seqs.len() * len);
        let mut mask = Vec::with_capacity(seqs.len() * len);
        for s in seqs {
            for i in 0..len {
                ids.push(s.get(i).copied().unwrap_or(PAD));
                mask.push(i < s.len());
            }
        }
        Seqs { batch: seqs.len(), len, ids, mask }
    }

    /// Row-wise slice `[from, to)` of every sequence.
    pub fn columns(&self, from: usize, to: usize) -> Seqs {
        let len = to - from;
        let mut ids = Vec::with_capacity(self.batch * len);
        let mut mask = Vec::with_capacity(self.batch * len);
        for b in 0..self.batch {
            ids.extend_from_slice(&self.ids[b * self.len + from..b * self.len + to]);
            mask.extend_from_slice(&self.mask[b * self.len + from..b * self.len + to]);
        }
        Seqs { batch: self.batch, len, ids, mask }
    }
}

/// Output of an encoder: CLS rows and all token states.
#[derive(Debug, Clone, Copy)]
pub struct Encoded {
    pub pooled: Var,
    pub states: Var,
}

/// Parameters plus the vocabularies they were sized for.
#[derive(Debug, Clone)]
pub struct AlignModel {
    pub config: ModelConfig,
    pub vocabs: Vocabs,
    pub params: ParamStore,
    pub layout: Layout,
}

pub fn linear(t: &mut Tape, l: Linear, x: Var) -> Var {
    let w = t.param(l.w);
    let b = t.param(l.b);
    let h = t.matmul(x, w);
    t.add_row(h, b)
}

pub fn mlp(t: &mut Tape, m: Mlp, x: Var) -> Var {
    let h = linear(t, m.l1, x);
    let h = t.gelu(h);
    linear(t, m.l2, h)
}

fn norm(t: &mut Tape, n: Norm, x: Var) -> Var {
    let g = t.param(n.gain);
    let b = t.param(n.bias);
    t.layer_norm(x, g, b)
}

fn attend(t: &mut Tape, a: Attn, xq: Var, xkv: Var, spec: AttnSpec) -> Var {
    let q = linear(t, a.q, xq);
    let k = linear(t, a.k, xkv);
    let v = linear(t, a.v, xkv);
    let o = t.attention(q, k, v, spec);
    linear(t, a.o, o)
}

/// Cross-attention context for decoder blocks.
pub struct Memory<'a> {
    pub states: Var,
    pub len: usize,
    pub mask: &'a [bool],
}

impl AlignModel {
    pub fn new(config: ModelConfig, vocabs: Vocabs, seed: u64) -> Self {
        let (layout, params) = build_layout(&config, &vocabs, Some(seed));
        AlignModel { config, vocabs, params, layout }
    }

    pub fn tape(&self) -> Tape<'_> {
        Tape::new(&self.params.tensors)
    }

    fn check_ids(&self, s: &Seqs, vocab: usize) -> Result<(), AlignError> {
        if let Some(&id) = s.ids.iter().find(|&&id| id >= vocab) {
            return Err(AlignError::TokenIdOutOfRange { id, vocab });
        }
        if s.len > self.config.max_len {
            return Err(AlignError::TokenIdOutOfRange { id: s.len, vocab: self.config.max_len });
        }
        Ok(())
    }

    fn embed(&self, t: &mut Tape, st: &Stack, s: &Seqs) -> Var {
        let tok = t.param(st.tok);
        let pos = t.param(st.pos);
        let positions: Vec<usize> = (0..s.batch).flat_map(|_| 0..s.len).collect();
        let x = t.embed(tok, &s.ids);
        let p = t.embed(pos, &positions);
        t.add(x, p)
    }

    fn run_stack(&self, t: &mut Tape, st: &Stack, s: &Seqs, causal: bool, memory: Option<&Memory>) -> Var {
        let mut x = self.embed(t, st, s);
        for blk in &st.blocks {
            let h = norm(t, blk.ln_self, x);
            let spec =
                AttnSpec { heads: self.config.heads, batch: s.batch, q_len: s.len, k_len: s.len, key_mask: s.mask.clone(), causal };
            let a = attend(t, blk.self_attn, h, h, spec);
            x = t.add(x, a);
            if let (Some((ln, cross)), Some(m)) = (blk.cross, memory) {
                let h = norm(t, ln, x);
                let spec = AttnSpec {
                    heads: self.config.heads,
                    batch: s.batch,
                    q_len: s.len,
                    k_len: m.len,
                    key_mask: m.mask.to_vec(),
                    causal: false,
                };
                let a = attend(t, cross, h, m.states, spec);
                x = t.add(x, a);
            }
            let h = norm(t, blk.ln_ff, x);
            let f = mlp(t, blk.ff, h);
            x = t.add(x, f);
        }
        norm(t, st.ln_out, x)
    }

    fn encoder(&self, m: Modality) -> &Stack {
        match m {
            Modality::Smiles => &self.layout.enc_s,
            Modality::Text => &self.layout.enc_t,
            Modality::Property => &self.layout.enc_p,
        }
    }

    /// Encodes CLS-prefixed sequences. The pooled row of each sequence is
    /// the final state at position 0.
    pub fn encode(&self, t: &mut Tape, m: Modality, s: &Seqs) -> Result<Encoded, AlignError> {
        self.check_ids(s, self.vocabs.get(m).len())?;
        let states = self.run_stack(t, self.encoder(m), s, false, None);
        let cls: Vec<usize> = (0..s.batch).map(|b| b * s.len).collect();
        let pooled = t.select_rows(states, &cls);
        Ok(Encoded { pooled, states })
    }

    /// Next-token logits (`batch * len` rows) for decoder inputs `s`,
    /// attending causally to themselves and fully to `memory`.
    pub fn decode(&self, t: &mut Tape, target: Modality, s: &Seqs, memory: &Memory) -> Result<Var, AlignError> {
        let (st, vocab) = match target {
            Modality::Text => (&self.layout.dec_t, self.vocabs.text.len()),
            Modality::Property => (&self.layout.dec_p, self.vocabs.property.len()),
            Modality::Smiles => unreachable!("there is no SMILES decoder"),
        };
        self.check_ids(s, vocab)?;
        let h = self.run_stack(t, st, s, true, Some(memory));
        Ok(linear(t, st.out.expect("decoder stack has an output layer"), h))
    }

    pub fn projection(&self, m: Modality) -> Mlp {
        match m {
            Modality::Smiles => self.layout.proj_s,
            Modality::Text => self.layout.proj_t,
            Modality::Property => self.layout.proj_p,
        }
    }

    pub fn match_head(&self, other: Modality) -> Mlp {
        match other {
            Modality::Property => self.layout.match_sp,
            _ => self.layout.match_st,
        }
    }

    /// L2-normalised joint-space embeddings of the pooled rows.
    pub fn project(&self, t: &mut Tape, m: Modality, pooled: Var) -> Var {
        let z = mlp(t, self.projection(m), pooled);
        t.l2_rows(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{build_vocabularies, CLS};
    use molsynth_core::instruct::Triplet;
    use molsynth_core::Registry;

    pub(crate) fn toy_model() -> AlignModel {
        let reg = Registry::default();
        let corpus: Vec<Triplet> = [("CCO", "ethanol is an alcohol."), ("c1ccccc1", "benzene is aromatic."), ("CC(=O)O", "acetic acid.")]
            .iter()
            .map(|(s, c)| Triplet::from_smiles(s, c, &reg).unwrap())
            .collect();
        let vocabs = build_vocabularies(&corpus, 50, 4).unwrap();
        AlignModel::new(ModelConfig::toy(), vocabs, 11)
    }

    #[test]
    fn cls_only_sequence_pools_its_single_state() {
        let m = toy_model();
        let mut t = m.tape();
        let s = Seqs::pad(&[&[CLS]]);
        let e = m.encode(&mut t, Modality::Smiles, &s).unwrap();
        assert_eq!(t.value(e.pooled), t.value(e.states));
    }

    #[test]
    fn batch_permutation_permutes_outputs() {
        let m = toy_model();
        let a: &[usize] = &[CLS, 5, 6, 5];
        let b: &[usize] = &[CLS, 6];
        let mut t = m.tape();
        let e1 = m.encode(&mut t, Modality::Smiles, &Seqs::pad(&[a, b])).unwrap();
        let e2 = m.encode(&mut t, Modality::Smiles, &Seqs::pad(&[b, a])).unwrap();
        let (p1, p2) = (t.value(e1.pooled), t.value(e2.pooled));
        for c in 0..p1.cols {
            assert!((p1.at(0, c) - p2.at(1, c)).abs() < 1e-12);
            assert!((p1.at(1, c) - p2.at(0, c)).abs() < 1e-12);
        }
    }

    #[test]
    fn padding_does_not_change_the_pooled_state() {
        let m = toy_model();
        let short: &[usize] = &[CLS, 5];
        let long: &[usize] = &[CLS, 5, 6, 6];
        let mut t = m.tape();
        let alone = m.encode(&mut t, Modality::Smiles, &Seqs::pad(&[short])).unwrap();
        let padded = m.encode(&mut t, Modality::Smiles, &Seqs::pad(&[short, long])).unwrap();
        let (a, p) = (t.value(alone.pooled), t.value(padded.pooled));
        for c in 0..a.cols {
            assert!((a.at(0, c) - p.at(0, c)).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_token_is_rejected() {
        let m = toy_model();
        let mut t = m.tape();
        let bad = m.vocabs.smiles.len();
        let r = m.encode(&mut t, Modality::Smiles, &Seqs::pad(&[&[CLS, bad]]));
        assert!(matches!(r, Err(AlignError::TokenIdOutOfRange { .. })));
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = toy_model();
        let b = toy_model();
        assert_eq!(a.params, b.params);
        assert!(a.params.names.iter().any(|n| n == "dec_t.0.cross.q.w"));
    }
}
