//! Reverse-mode differentiation over a linear tape of matrix ops.
//! Attention, layer norm and softmax cross-entropy are fused nodes with
//! hand-written backward passes.

use crate::tensor::{matmul, matmul_at, matmul_bt, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

/// Batched multi-head attention layout. Query rows are `batch * q_len`
/// (sequence-major), key/value rows `batch * k_len`.
#[derive(Debug, Clone)]
pub struct AttnSpec {
    pub heads: usize,
    pub batch: usize,
    pub q_len: usize,
    pub k_len: usize,
    /// `false` marks a padded key position that gets zero weight.
    pub key_mask: Vec<bool>,
    pub causal: bool,
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    MatMulBt(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    Gelu(Var),
    LayerNorm { x: Var, gain: Var, bias: Var, xhat: Vec<f64>, inv_std: Vec<f64> },
    Embed { table: Var, ids: Vec<usize> },
    Attention { q: Var, k: Var, v: Var, spec: AttnSpec, probs: Vec<f64> },
    SelectRows(Var, Vec<usize>),
    ConcatCols(Var, Var),
    L2Rows(Var),
    CrossEntropy { logits: Var, targets: Vec<Option<usize>>, probs: Vec<f64>, count: usize },
    Transpose(Var),
}

struct Node {
    value: Tensor,
    op: Op,
}

pub struct Tape<'p> {
    params: &'p [Tensor],
    nodes: Vec<Node>,
    param_vars: Vec<Option<Var>>,
}

const LN_EPS: f64 = 1e-5;
const L2_EPS: f64 = 1e-12;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + 0.044715 * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + 0.044715 * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p [Tensor]) -> Self {
        Tape { params, nodes: Vec::new(), param_vars: vec![None; params.len()] }
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf for parameter `idx`, created once per tape.
    pub fn param(&mut self, idx: usize) -> Var {
        if let Some(v) = self.param_vars[idx] {
            return v;
        }
        let v = self.push(self.params[idx].clone(), Op::Leaf);
        self.param_vars[idx] = Some(v);
        v
    }

    /// Constant input with no gradient.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = matmul(self.value(a), self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    /// a x b^T
    pub fn matmul_bt(&mut self, a: Var, b: Var) -> Var {
        let v = matmul_bt(self.value(a), self.value(b));
        self.push(v, Op::MatMulBt(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let mut v = self.value(a).clone();
        assert!(v.same_shape(self.value(b)), "add: shape mismatch");
        v.add_assign(self.value(b));
        self.push(v, Op::Add(a, b))
    }

    /// Adds the 1xN row `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let bias = self.value(b);
        assert_eq!((bias.rows, bias.cols), (1, self.value(a).cols), "add_row: bias shape");
        let mut v = self.value(a).clone();
        let n = v.cols;
        for r in 0..v.rows {
            for (x, y) in v.data[r * n..(r + 1) * n].iter_mut().zip(&bias.data) {
                *x += y;
            }
        }
        self.push(v, Op::AddRow(a, b))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let mut v = self.value(a).clone();
        v.data.iter_mut().for_each(|x| *x *= s);
        self.push(v, Op::Scale(a, s))
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let mut v = self.value(a).clone();
        v.data.iter_mut().for_each(|x| *x = gelu(*x));
        self.push(v, Op::Gelu(a))
    }

    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Var {
        let xv = self.value(x);
        let (rows, n) = (xv.rows, xv.cols);
        let g = &self.value(gain).data;
        let b = &self.value(bias).data;
        let mut out = Tensor::zeros(rows, n);
        let mut xhat = vec![0.0; rows * n];
        let mut inv_std = vec![0.0; rows];
        for r in 0..rows {
            let row = xv.row(r);
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            inv_std[r] = inv;
            for c in 0..n {
                let h = (row[c] - mean) * inv;
                xhat[r * n + c] = h;
                out.data[r * n + c] = h * g[c] + b[c];
            }
        }
        self.push(out, Op::LayerNorm { x, gain, bias, xhat, inv_std })
    }

    /// Rows of `table` picked by `ids`.
    pub fn embed(&mut self, table: Var, ids: &[usize]) -> Var {
        let t = self.value(table);
        let mut out = Tensor::zeros(ids.len(), t.cols);
        for (r, &id) in ids.iter().enumerate() {
            out.data[r * t.cols..(r + 1) * t.cols].copy_from_slice(t.row(id));
        }
        self.push(out, Op::Embed { table, ids: ids.to_vec() })
    }

    pub fn attention(&mut self, q: Var, k: Var, v: Var, spec: AttnSpec) -> Var {
        let (qv, kv, vv) = (self.value(q), self.value(k), self.value(v));
        let d = qv.cols;
        assert_eq!(d % spec.heads, 0, "model dim must divide into heads");
        assert_eq!(qv.rows, spec.batch * spec.q_len);
        assert_eq!(kv.rows, spec.batch * spec.k_len);
        assert_eq!(spec.key_mask.len(), kv.rows);
        let dh = d / spec.heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let (lq, lk) = (spec.q_len, spec.k_len);
        let mut probs = vec![0.0; spec.batch * spec.heads * lq * lk];
        let mut out = Tensor::zeros(qv.rows, d);
        let mut scores = vec![0.0; lk];
        for b in 0..spec.batch {
            for h in 0..spec.heads {
                let off = h * dh;
                for i in 0..lq {
                    let qr = &qv.row(b * lq + i)[off..off + dh];
                    let mut max = f64::NEG_INFINITY;
                    for j in 0..lk {
                        let allowed = spec.key_mask[b * lk + j] && !(spec.causal && j > i);
                        scores[j] = if allowed {
                            let kr = &kv.row(b * lk + j)[off..off + dh];
                            let s = qr.iter().zip(kr).map(|(x, y)| x * y).sum::<f64>() * scale;
                            max = max.max(s);
                            s
                        } else {
                            f64::NEG_INFINITY
                        };
                    }
                    if max == f64::NEG_INFINITY {
                        continue;
                    }
                    let base = ((b * spec.heads + h) * lq + i) * lk;
                    let mut z = 0.0;
                    for j in 0..lk {
                        let e = if scores[j] == f64::NEG_INFINITY { 0.0 } else { (scores[j] - max).exp() };
                        probs[base + j] = e;
                        z += e;
                    }
                    let orow = b * lq + i;
                    for j in 0..lk {
                        let p = probs[base + j] / z;
                        probs[base + j] = p;
                        if p == 0.0 {
                            continue;
                        }
                        let vr = &vv.row(b * lk + j)[off..off + dh];
                        let o = &mut out.data[orow * d + off..orow * d + off + dh];
                        for (oc, vc) in o.iter_mut().zip(vr) {
                            *oc += p * vc;
                        }
                    }
                }
            }
        }
        self.push(out, Op::Attention { q, k, v, spec, probs })
    }

    pub fn select_rows(&mut self, a: Var, idx: &[usize]) -> Var {
        let t = self.value(a);
        let mut out = Tensor::zeros(idx.len(), t.cols);
        for (r, &i) in idx.iter().enumerate() {
            out.data[r * t.cols..(r + 1) * t.cols].copy_from_slice(t.row(i));
        }
        self.push(out, Op::SelectRows(a, idx.to_vec()))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Var {
        let (x, y) = (self.value(a), self.value(b));
        assert_eq!(x.rows, y.rows, "concat_cols: row mismatch");
        let mut out = Tensor::zeros(x.rows, x.cols + y.cols);
        for r in 0..x.rows {
            let o = &mut out.data[r * (x.cols + y.cols)..(r + 1) * (x.cols + y.cols)];
            o[..x.cols].copy_from_slice(x.row(r));
            o[x.cols..].copy_from_slice(y.row(r));
        }
        self.push(out, Op::ConcatCols(a, b))
    }

    /// Each row divided by its Euclidean norm.
    pub fn l2_rows(&mut self, a: Var) -> Var {
        let mut v = self.value(a).clone();
        let n = v.cols;
        for r in 0..v.rows {
            let row = &mut v.data[r * n..(r + 1) * n];
            let norm = (row.iter().map(|x| x * x).sum::<f64>() + L2_EPS).sqrt();
            row.iter_mut().for_each(|x| *x /= norm);
        }
        self.push(v, Op::L2Rows(a))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.value(a).transpose();
        self.push(v, Op::Transpose(a))
    }

    /// Mean softmax cross-entropy over rows whose target is `Some`; a 1x1
    /// result. Rows with `None` are ignored.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[Option<usize>]) -> Var {
        let l = self.value(logits);
        assert_eq!(l.rows, targets.len(), "cross_entropy: one target per row");
        let n = l.cols;
        let mut probs = vec![0.0; l.rows * n];
        let mut total = 0.0;
        let mut count = 0;
        for (r, t) in targets.iter().enumerate() {
            let Some(t) = *t else { continue };
            let row = l.row(r);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|x| (x - max).exp()).sum();
            for c in 0..n {
                probs[r * n + c] = (row[c] - max).exp() / z;
            }
            total += z.ln() + max - row[t];
            count += 1;
        }
        let value = if count == 0 { 0.0 } else { total / count as f64 };
        self.push(Tensor::scalar(value), Op::CrossEntropy { logits, targets: targets.to_vec(), probs, count })
    }

    /// Gradients of the 1x1 node `loss` with respect to every parameter
    /// touched by this tape; untouched parameters get `None`.
    pub fn backward(&self, loss: Var) -> Vec<Option<Tensor>> {
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));
        fn acc(grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
            match &mut grads[v.0] {
                Some(t) => t.add_assign(&g),
                slot @ None => *slot = Some(g),
            }
        }
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {
                    grads[i] = Some(g);
                }
                Op::MatMul(a, b) => {
                    acc(&mut grads, *a, matmul_bt(&g, self.value(*b)));
                    acc(&mut grads, *b, matmul_at(self.value(*a), &g));
                }
                Op::MatMulBt(a, b) => {
                    acc(&mut grads, *a, matmul(&g, self.value(*b)));
                    acc(&mut grads, *b, matmul_at(&g, self.value(*a)));
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::AddRow(a, b) => {
                    let mut gb = Tensor::zeros(1, g.cols);
                    for r in 0..g.rows {
                        for (x, y) in gb.data.iter_mut().zip(g.row(r)) {
                            *x += y;
                        }
                    }
                    acc(&mut grads, *b, gb);
                    acc(&mut grads, *a, g);
                }
                Op::Scale(a, s) => {
                    let mut ga = g;
                    ga.data.iter_mut().for_each(|x| *x *= s);
                    acc(&mut grads, *a, ga);
                }
                Op::Gelu(a) => {
                    let mut ga = g;
                    for (x, inp) in ga.data.iter_mut().zip(&self.value(*a).data) {
                        *x *= gelu_grad(*inp);
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::LayerNorm { x, gain, bias, xhat, inv_std } => {
                    let n = g.cols;
                    let gv = &self.value(*gain).data;
                    let mut gg = Tensor::zeros(1, n);
                    let mut gbias = Tensor::zeros(1, n);
                    let mut gx = Tensor::zeros(g.rows, n);
                    for r in 0..g.rows {
                        let gr = g.row(r);
                        let hr = &xhat[r * n..(r + 1) * n];
                        let mut sum_d = 0.0;
                        let mut sum_dh = 0.0;
                        for c in 0..n {
                            gg.data[c] += gr[c] * hr[c];
                            gbias.data[c] += gr[c];
                            let d = gr[c] * gv[c];
                            sum_d += d;
                            sum_dh += d * hr[c];
                        }
                        for c in 0..n {
                            let d = gr[c] * gv[c];
                            gx.data[r * n + c] = inv_std[r] / n as f64 * (n as f64 * d - sum_d - hr[c] * sum_dh);
                        }
                    }
                    acc(&mut grads, *gain, gg);
                    acc(&mut grads, *bias, gbias);
                    acc(&mut grads, *x, gx);
                }
                Op::Embed { table, ids } => {
                    let t = self.value(*table);
                    let mut gt = Tensor::zeros(t.rows, t.cols);
                    for (r, &id) in ids.iter().enumerate() {
                        for (x, y) in gt.data[id * t.cols..(id + 1) * t.cols].iter_mut().zip(g.row(r)) {
                            *x += y;
                        }
                    }
                    acc(&mut grads, *table, gt);
                }
                Op::Attention { q, k, v, spec, probs } => {
                    let (gq, gk, gv) = self.attention_backward(&g, *q, *k, *v, spec, probs);
                    acc(&mut grads, *q, gq);
                    acc(&mut grads, *k, gk);
                    acc(&mut grads, *v, gv);
                }
                Op::SelectRows(a, idx) => {
                    let t = self.value(*a);
                    let mut ga = Tensor::zeros(t.rows, t.cols);
                    for (r, &i) in idx.iter().enumerate() {
                        for (x, y) in ga.data[i * t.cols..(i + 1) * t.cols].iter_mut().zip(g.row(r)) {
                            *x += y;
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.value(*a).cols;
                    let cb = self.value(*b).cols;
                    let mut ga = Tensor::zeros(g.rows, ca);
                    let mut gb = Tensor::zeros(g.rows, cb);
                    for r in 0..g.rows {
                        ga.data[r * ca..(r + 1) * ca].copy_from_slice(&g.row(r)[..ca]);
                        gb.data[r * cb..(r + 1) * cb].copy_from_slice(&g.row(r)[ca..]);
                    }
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::L2Rows(a) => {
                    let x = self.value(*a);
                    let y = &node.value;
                    let n = x.cols;
                    let mut ga = Tensor::zeros(x.rows, n);
                    for r in 0..x.rows {
                        let norm = (x.row(r).iter().map(|v| v * v).sum::<f64>() + L2_EPS).sqrt();
                        let gy: f64 = g.row(r).iter().zip(y.row(r)).map(|(p, q)| p * q).sum();
                        for c in 0..n {
                            ga.data[r * n + c] = (g.at(r, c) - y.at(r, c) * gy) / norm;
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::Transpose(a) => {
                    acc(&mut grads, *a, g.transpose());
                }
                Op::CrossEntropy { logits, targets, probs, count } => {
                    let l = self.value(*logits);
                    let mut gl = Tensor::zeros(l.rows, l.cols);
                    if *count > 0 {
                        let s = g.item() / *count as f64;
                        for (r, t) in targets.iter().enumerate() {
                            let Some(t) = *t else { continue };
                            for c in 0..l.cols {
                                gl.data[r * l.cols + c] = s * probs[r * l.cols + c];
                            }
                            gl.data[r * l.cols + t] -= s;
                        }
                    }
                    acc(&mut grads, *logits, gl);
                }
            }
        }
        self.param_vars.iter().map(|pv| pv.and_then(|v| grads[v.0].take())).collect()
    }

    fn attention_backward(&self, g: &Tensor, q: Var, k: Var, v: Var, spec: &AttnSpec, probs: &[f64]) -> (Tensor, Tensor, Tensor) {
        let (qv, kv, vv) = (self.value(q), self.value(k), self.value(v));
        let d = qv.cols;
        let dh = d / spec.heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let (lq, lk) = (spec.q_len, spec.k_len);
        let mut gq = Tensor::zeros(qv.rows, d);
        let mut gk = Tensor::zeros(kv.rows, d);
        let mut gvv = Tensor::zeros(vv.rows, d);
        let mut dp = vec![0.0; lk];
        for b in 0..spec.batch {
            for h in 0..spec.heads {
                let off = h * dh;
                for i in 0..lq {
                    let base = ((b * spec.heads + h) * lq + i) * lk;
                    let p = &probs[base..base + lk];
                    let go = &g.row(b * lq + i)[off..off + dh];
                    let mut dot = 0.0;
                    for j in 0..lk {
                        if p[j] == 0.0 {
                            dp[j] = 0.0;
                            continue;
                        }
                        let vr = &vv.row(b * lk + j)[off..off + dh];
                        dp[j] = go.iter().zip(vr).map(|(x, y)| x * y).sum();
                        dot += p[j] * dp[j];
                        let gvr = &mut gvv.data[(b * lk + j) * d + off..(b * lk + j) * d + off + dh];
                        for (x, y) in gvr.iter_mut().zip(go) {
                            *x += p[j] * y;
                        }
                    }
                    let qr = &qv.row(b * lq + i)[off..off + dh];
                    for j in 0..lk {
                        if p[j] == 0.0 {
                            continue;
                        }
                        let ds = p[j] * (dp[j] - dot) * scale;
                        let kr = &kv.row(b * lk + j)[off..off + dh];
                        let gqr = &mut gq.data[(b * lq + i) * d + off..(b * lq + i) * d + off + dh];
                        for (x, y) in gqr.iter_mut().zip(kr) {
                            *x += ds * y;
                        }
                        let gkr = &mut gk.data[(b * lk + j) * d + off..(b * lk + j) * d + off + dh];
                        for (x, y) in gkr.iter_mut().zip(qr) {
                            *x += ds * y;
                        }
                    }
                }
            }
        }
        (gq, gk, gvv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central differences of `f` over every entry of every parameter.
    fn numeric(params: &[Tensor], f: &dyn Fn(&[Tensor]) -> f64) -> Vec<Tensor> {
        let mut p = params.to_vec();
        let h = 1e-6;
        let mut out = Vec::new();
        for i in 0..p.len() {
            let mut g = Tensor::zeros(p[i].rows, p[i].cols);
            for e in 0..p[i].data.len() {
                let x0 = p[i].data[e];
                p[i].data[e] = x0 + h;
                let up = f(&p);
                p[i].data[e] = x0 - h;
                let down = f(&p);
                p[i].data[e] = x0;
                g.data[e] = (up - down) / (2.0 * h);
            }
            out.push(g);
        }
        out
    }

    fn close(a: &[Option<Tensor>], b: &[Tensor]) {
        for (x, y) in a.iter().zip(b) {
            let x = x.as_ref().expect("gradient present");
            for (p, q) in x.data.iter().zip(&y.data) {
                assert!((p - q).abs() <= 1e-6 * (1.0 + p.abs().max(q.abs())), "{p} vs {q}");
            }
        }
    }

    fn pseudo(rows: usize, cols: usize, seed: u64) -> Tensor {
        let mut s = seed;
        let data = (0..rows * cols)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect();
        Tensor::from_vec(rows, cols, data)
    }

    #[test]
    fn dense_ops_match_finite_differences() {
        let params = vec![pseudo(3, 4, 1), pseudo(4, 5, 2), pseudo(1, 5, 3), pseudo(1, 5, 4), pseudo(1, 5, 5)];
        let f = |p: &[Tensor]| {
            let mut t = Tape::new(p);
            let (x, w, b, g, beta) = (t.param(0), t.param(1), t.param(2), t.param(3), t.param(4));
            let h = t.matmul(x, w);
            let h = t.add_row(h, b);
            let h = t.gelu(h);
            let h = t.layer_norm(h, g, beta);
            let n = t.l2_rows(h);
            let s = t.matmul_bt(n, h);
            let s = t.scale(s, 2.0);
            let st = t.transpose(s);
            let s = t.add(s, st);
            let l = t.cross_entropy(s, &[Some(0), None, Some(2)]);
            (t.value(l).item(), t.backward(l))
        };
        let (_, analytic) = f(&params);
        let numeric = numeric(&params, &|p| f(p).0);
        close(&analytic, &numeric);
    }

    #[test]
    fn attention_matches_finite_differences() {
        let params = vec![pseudo(6, 4, 7), pseudo(4, 4, 8), pseudo(6, 3, 9), pseudo(5, 1, 10)];
        let f = |p: &[Tensor]| {
            let mut t = Tape::new(p);
            let x = t.param(0);
            let w = t.param(1);
            let q = t.matmul(x, w);
            let emb = t.param(2);
            let k = t.embed(emb, &[0, 1, 2, 3, 4, 5]);
            let kk = t.concat_cols(k, k);
            let kk = t.select_rows(kk, &[0, 1, 2, 3, 4, 5]);
            let proj = t_const_cols(&mut t);
            let k4 = t.matmul_bt(kk, proj);
            let spec = AttnSpec {
                heads: 2,
                batch: 2,
                q_len: 3,
                k_len: 3,
                key_mask: vec![true, true, false, true, true, true],
                causal: true,
            };
            let o = t.attention(q, k4, x, spec);
            let out = t.param(3);
            let logits = t.matmul_bt(o, x);
            let _ = out;
            let l = t.cross_entropy(logits, &[Some(1), Some(0), Some(5), Some(2), None, Some(3)]);
            (t.value(l).item(), t.backward(l))
        };
        fn t_const_cols(t: &mut Tape) -> Var {
            t.constant(Tensor::from_vec(4, 6, (0..24).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect()))
        }
        let (_, analytic) = f(&params);
        let numeric = numeric(&params, &|p| f(p).0);
        // parameter 3 is unused: no gradient
        assert!(analytic[3].is_none());
        close(&analytic[..3], &numeric[..3]);
    }

    #[test]
    fn masked_keys_get_zero_weight() {
        let params = vec![pseudo(4, 2, 3)];
        let mut t = Tape::new(&params);
        let x = t.param(0);
        let spec = AttnSpec { heads: 1, batch: 1, q_len: 4, k_len: 4, key_mask: vec![true, true, false, false], causal: false };
        let o = t.attention(x, x, x, spec);
        let Op::Attention { probs, .. } = &t.nodes[o.0].op else { unreachable!() };
        for i in 0..4 {
            let row = &probs[i * 4..i * 4 + 4];
            assert_eq!(&row[2..], &[0.0, 0.0]);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
