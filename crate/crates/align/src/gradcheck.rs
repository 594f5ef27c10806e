use serde::Serialize;

use crate::batch::Batch;
use crate::loss::{batch_losses, LossTerm};
use crate::model::AlignModel;
use crate::tape::Tape;
use crate::tensor::Tensor;
use crate::AlignError;

/// Finite-difference step.
pub const STEP: f64 = 1e-5;

/// Denominator floor of the relative error. Entries whose true gradient is
/// zero (key biases under softmax, for one) only carry the ~1e-10
/// roundoff of the central difference, which this keeps well under 1e-4.
pub const REL_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub term: LossTerm,
    pub max_rel_error: f64,
    /// Parameter name and flat index of the worst entry.
    pub worst: (String, usize),
    pub entries_checked: usize,
    pub passed: bool,
}

fn loss_value(model: &AlignModel, params: &[Tensor], batch: &Batch, term: LossTerm) -> Result<f64, AlignError> {
    let mut t = Tape::new(params);
    let v = batch_losses(model, &mut t, batch, &[term])?[0].1;
    Ok(t.value(v).item())
}

/// Compares the tape gradient of one loss term against central
/// differences on every entry of every parameter tensor. Parameters the
/// term never reads are still perturbed, and must show a zero difference.
pub fn grad_check(model: &AlignModel, batch: &Batch, term: LossTerm, tolerance: f64) -> Result<GradCheckReport, AlignError> {
    let analytic = {
        let mut t = model.tape();
        let v = batch_losses(model, &mut t, batch, &[term])?[0].1;
        t.backward(v)
    };
    let mut params = model.params.tensors.clone();
    let mut worst = (0.0f64, String::new(), 0usize);
    let mut checked = 0;
    for (i, grad) in analytic.iter().enumerate() {
        if let Some(g) = grad {
            if !g.is_finite() {
                return Err(AlignError::NonFiniteGradient(model.params.names[i].clone()));
            }
        }
        for e in 0..params[i].data.len() {
            let x0 = params[i].data[e];
            params[i].data[e] = x0 + STEP;
            let up = loss_value(model, &params, batch, term)?;
            params[i].data[e] = x0 - STEP;
            let down = loss_value(model, &params, batch, term)?;
            params[i].data[e] = x0;
            let numeric = (up - down) / (2.0 * STEP);
            let a = grad.as_ref().map_or(0.0, |g| g.data[e]);
            if !numeric.is_finite() {
                return Err(AlignError::NonFiniteGradient(model.params.names[i].clone()));
            }
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(REL_FLOOR);
            if rel > worst.0 {
                worst = (rel, model.params.names[i].clone(), e);
            }
            checked += 1;
        }
    }
    Ok(GradCheckReport { term, max_rel_error: worst.0, worst: (worst.1, worst.2), entries_checked: checked, passed: worst.0 <= tolerance })
}
