//! Finite-difference check of the batch gradient.

use super::{batch_gradient, batch_objective, choose_negatives, forward, stream_rng, EncodedBatch, TrainConfig, STREAM_AUDIT};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::vocab::NGramVocab;

/// Central-difference step.
pub const AUDIT_STEP: f64 = 1e-5;

/// Components whose analytic and numeric magnitudes are both below this are
/// compared on an absolute rather than relative scale.
pub const AUDIT_ABS_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    /// Largest `|analytic − numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    /// Parameters compared (bias plus every coordinate of touched rows).
    pub checked: usize,
    /// Smallest `|hinge argument|` in the batch. Values near the step size
    /// mean a difference may straddle a kink.
    pub min_hinge_distance: f64,
}

/// Compares the analytic batch gradient against central differences of the
/// full batch objective (hinge mean plus the touched-set L2 term), with the
/// negatives frozen at the selection made for the unperturbed model.
pub fn finite_diff_audit(
    model: &Model<f64>,
    vocab: &NGramVocab,
    sample_batch: &[(String, String)],
    config: &TrainConfig,
) -> Result<AuditReport> {
    if sample_batch.len() < 2 {
        return Err(Error::CannotSampleNegatives(sample_batch.len()));
    }
    model.check_vocab(vocab)?;
    let batch = EncodedBatch::new(sample_batch, vocab, config.case);
    let fwd = forward(model, &batch)?;
    let mut rng = stream_rng(config.seed, STREAM_AUDIT, 0);
    let negatives = choose_negatives(&batch, &fwd.emb, config, &mut rng)?;
    let (_, grad) = batch_gradient(model, &batch, &fwd, &negatives, config)?;

    let min_hinge_distance = negatives
        .iter()
        .enumerate()
        .flat_map(|(i, n)| {
            let e = &fwd.emb;
            let pos = crate::model::cosine_unchecked(&e[2 * i], &e[2 * i + 1]);
            [
                config.margin - pos + crate::model::cosine_unchecked(&e[2 * i], &e[n.t1.slot()]),
                config.margin - pos + crate::model::cosine_unchecked(&e[2 * i + 1], &e[n.t2.slot()]),
            ]
        })
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min);

    let objective = |m: &Model<f64>| -> Result<f64> { Ok(batch_objective(m, &batch, &negatives, config)?.objective) };
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let mut checked = 0;

    let mut compare = |analytic: f64, numeric: f64| {
        let denom = analytic.abs().max(numeric.abs()).max(AUDIT_ABS_FLOOR);
        worst = worst.max((analytic - numeric).abs() / denom);
        checked += 1;
    };

    for k in 0..model.dim() {
        let orig = probe.bias()[k];
        probe.bias_mut()[k] = orig + AUDIT_STEP;
        let plus = objective(&probe)?;
        probe.bias_mut()[k] = orig - AUDIT_STEP;
        let minus = objective(&probe)?;
        probe.bias_mut()[k] = orig;
        compare(grad.bias[k], (plus - minus) / (2.0 * AUDIT_STEP));
    }
    for (&row, g) in &grad.rows {
        for (k, &analytic) in g.iter().enumerate() {
            let orig = probe.row(row)[k];
            probe.row_mut(row)[k] = orig + AUDIT_STEP;
            let plus = objective(&probe)?;
            probe.row_mut(row)[k] = orig - AUDIT_STEP;
            let minus = objective(&probe)?;
            probe.row_mut(row)[k] = orig;
            compare(analytic, (plus - minus) / (2.0 * AUDIT_STEP));
        }
    }
    Ok(AuditReport { max_rel_error: worst, checked, min_hinge_distance })
}
