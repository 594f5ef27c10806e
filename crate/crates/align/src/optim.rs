use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.01 }
    }
}

/// Adam with decoupled weight decay. Decay applies to tensors whose
/// `decay` flag is set (weights and embeddings, not biases or norms).
pub struct AdamW {
    pub config: AdamWConfig,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    decay: Vec<bool>,
    step: u32,
}

impl AdamW {
    pub fn new(config: AdamWConfig, params: &[Tensor], decay: Vec<bool>) -> Self {
        let zeros = |p: &Tensor| Tensor::zeros(p.rows, p.cols);
        AdamW { config, m: params.iter().map(zeros).collect(), v: params.iter().map(zeros).collect(), decay, step: 0 }
    }

    pub fn step(&mut self, params: &mut [Tensor], grads: &[Option<Tensor>]) {
        self.step += 1;
        let c = &self.config;
        let bc1 = 1.0 - c.beta1.powi(self.step as i32);
        let bc2 = 1.0 - c.beta2.powi(self.step as i32);
        for (i, p) in params.iter_mut().enumerate() {
            let Some(g) = &grads[i] else { continue };
            let wd = if self.decay[i] { c.weight_decay } else { 0.0 };
            let (m, v) = (&mut self.m[i].data, &mut self.v[i].data);
            for k in 0..p.data.len() {
                m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g.data[k];
                v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g.data[k] * g.data[k];
                let update = (m[k] / bc1) / ((v[k] / bc2).sqrt() + c.eps) + wd * p.data[k];
                p.data[k] -= c.lr * update;
            }
        }
    }
}

/// Rescales gradients so their joint L2 norm is at most `max_norm`;
/// returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [Option<Tensor>], max_norm: f64) -> f64 {
    let norm = grads.iter().flatten().flat_map(|g| &g.data).map(|x| x * x).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.iter_mut().flatten().for_each(|g| g.data.iter_mut().for_each(|x| *x *= s));
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimises_a_quadratic() {
        let mut p = vec![Tensor::from_vec(1, 2, vec![3.0, -2.0])];
        let mut opt = AdamW::new(AdamWConfig { lr: 0.05, weight_decay: 0.0, ..Default::default() }, &p, vec![true]);
        for _ in 0..2000 {
            let g = Tensor::from_vec(1, 2, p[0].data.iter().map(|x| 2.0 * x).collect());
            opt.step(&mut p, &[Some(g)]);
        }
        assert!(p[0].data.iter().all(|x| x.abs() < 1e-3), "{:?}", p[0].data);
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let mut p = vec![Tensor::from_vec(1, 2, vec![3.0, -2.0])];
        let before = p.clone();
        let mut opt = AdamW::new(AdamWConfig { lr: 0.0, ..Default::default() }, &p, vec![true]);
        opt.step(&mut p, &[Some(Tensor::from_vec(1, 2, vec![1.0, 1.0]))]);
        assert_eq!(p, before);
    }

    #[test]
    fn clipping_caps_the_norm() {
        let mut g = vec![Some(Tensor::from_vec(1, 2, vec![3.0, 4.0])), None];
        assert_eq!(clip_global_norm(&mut g, 1.0), 5.0);
        let d = &g[0].as_ref().unwrap().data;
        assert!((d[0] - 0.6).abs() < 1e-12 && (d[1] - 0.8).abs() < 1e-12);
    }
}
