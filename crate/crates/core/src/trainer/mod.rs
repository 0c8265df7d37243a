//! Margin-based contrastive training over paraphrase pairs.
//!
//! For each pair `(x1, x2)` with negatives `(t1, t2)` the loss is
//!
//! ```text
//! max(0, δ − cos(x1, x2) + cos(x1, t1)) + max(0, δ − cos(x1, x2) + cos(x2, t2))
//! ```
//!
//! averaged over the mini-batch, plus `λ‖θ‖²` over the bias and the rows of
//! `W` touched by the batch.

mod adam;
mod audit;
mod config;
mod negatives;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use adam::{AdamParams, AdamState};
pub use audit::{finite_diff_audit, AuditReport};
pub use config::{NegativePool, Sampling, TrainConfig};
pub use negatives::{select_negatives, Negatives, PairView, PhraseRef, Side};

use crate::error::{Error, Result};
use crate::model::{axpy, cosine_unchecked, cosine_with_grad, Model, ParamGrad};
use crate::scalar::Scalar;
use crate::vocab::{encode, normalize, CaseMode, CountVector, NGramVocab};

/// Paraphrase pairs in source order (descending confidence).
#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    pairs: Vec<(String, String)>,
}

impl PairDataset {
    /// Rejects pairs with a side that is empty after normalization; the
    /// error carries the offending pair's 0-based position.
    pub fn new(pairs: Vec<(String, String)>) -> std::result::Result<Self, usize> {
        if let Some(bad) = pairs.iter().position(|(a, b)| a.trim().is_empty() || b.trim().is_empty()) {
            return Err(bad);
        }
        Ok(PairDataset { pairs })
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// All phrases, both sides, in file order.
    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()])
    }
}

/// Hinge loss for one pair given its four embeddings.
pub fn pair_loss<T: Scalar>(x1: &[T], x2: &[T], t1: &[T], t2: &[T], margin: T) -> T {
    let pos = cosine_unchecked(x1, x2);
    let h1 = margin - pos + cosine_unchecked(x1, t1);
    let h2 = margin - pos + cosine_unchecked(x2, t2);
    h1.max(T::zero()) + h2.max(T::zero())
}

/// A batch encoded once: phrase `slot` is `2 * pair + side`.
#[derive(Debug, Clone)]
pub(crate) struct EncodedBatch {
    keys: Vec<String>,
    cvs: Vec<CountVector>,
}

impl EncodedBatch {
    pub(crate) fn new(pairs: &[(String, String)], vocab: &NGramVocab, case: CaseMode) -> Self {
        let mut keys = Vec::with_capacity(2 * pairs.len());
        let mut cvs = Vec::with_capacity(2 * pairs.len());
        for text in pairs.iter().flat_map(|(a, b)| [a, b]) {
            let seq = normalize(text, case);
            cvs.push(encode(&seq, vocab));
            keys.push(seq.inner());
        }
        EncodedBatch { keys, cvs }
    }

    pub(crate) fn pairs(&self) -> usize {
        self.cvs.len() / 2
    }

    /// Rows referenced by any phrase in the batch, ascending.
    pub(crate) fn touched_rows(&self) -> BTreeSet<usize> {
        self.cvs.iter().flat_map(|cv| cv.iter().map(|(i, _)| i)).collect()
    }
}

struct Forward<T> {
    pre: Vec<Vec<T>>,
    emb: Vec<Vec<T>>,
}

fn forward<T: Scalar>(model: &Model<T>, batch: &EncodedBatch) -> Result<Forward<T>> {
    let mut pre = Vec::with_capacity(batch.cvs.len());
    let mut emb = Vec::with_capacity(batch.cvs.len());
    for cv in &batch.cvs {
        let p = model.pre_activation(cv)?;
        emb.push(model.finish_embedding(cv, &p).values);
        pre.push(p);
    }
    Ok(Forward { pre, emb })
}

fn choose_negatives<T: Scalar>(
    batch: &EncodedBatch,
    emb: &[Vec<T>],
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Negatives>> {
    let views: Vec<PairView<'_, T>> = (0..batch.pairs())
        .map(|i| PairView {
            key1: &batch.keys[2 * i],
            key2: &batch.keys[2 * i + 1],
            emb1: &emb[2 * i],
            emb2: &emb[2 * i + 1],
        })
        .collect();
    select_negatives(&views, config.sampling, config.pool, rng)
}

fn regularizer<T: Scalar>(model: &Model<T>, rows: &BTreeSet<usize>) -> T {
    let sq = |xs: &[T]| xs.iter().fold(T::zero(), |a, &x| a + x * x);
    rows.iter().fold(sq(model.bias()), |acc, &r| acc + sq(model.row(r)))
}

/// Value of the batch objective with negatives held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchObjective<T> {
    /// Mean hinge loss over the pairs.
    pub loss: T,
    /// `loss + λ‖θ_touched‖²`.
    pub objective: T,
}

pub(crate) fn batch_objective<T: Scalar>(
    model: &Model<T>,
    batch: &EncodedBatch,
    negatives: &[Negatives],
    config: &TrainConfig,
) -> Result<BatchObjective<T>> {
    let fwd = forward(model, batch)?;
    let margin = T::of(config.margin);
    let mut total = T::zero();
    for (i, neg) in negatives.iter().enumerate() {
        total += pair_loss(
            &fwd.emb[2 * i],
            &fwd.emb[2 * i + 1],
            &fwd.emb[neg.t1.slot()],
            &fwd.emb[neg.t2.slot()],
            margin,
        );
    }
    let loss = total / T::from_usize(negatives.len()).unwrap();
    let objective = loss + T::of(config.lambda) * regularizer(model, &batch.touched_rows());
    Ok(BatchObjective { loss, objective })
}

/// Analytic gradient of [`batch_objective`] at `fwd`.
fn batch_gradient<T: Scalar>(
    model: &Model<T>,
    batch: &EncodedBatch,
    fwd: &Forward<T>,
    negatives: &[Negatives],
    config: &TrainConfig,
) -> Result<(BatchObjective<T>, ParamGrad<T>)> {
    let dim = model.dim();
    let n = negatives.len();
    let scale = T::one() / T::from_usize(n).unwrap();
    let margin = T::of(config.margin);
    let mut upstream: Vec<Option<Vec<T>>> = vec![None; batch.cvs.len()];
    let mut add = |slot: usize, alpha: T, g: &[T]| {
        let dst = upstream[slot].get_or_insert_with(|| vec![T::zero(); dim]);
        axpy(dst, alpha, g);
    };

    let mut total = T::zero();
    for (i, neg) in negatives.iter().enumerate() {
        let (s1, s2) = (2 * i, 2 * i + 1);
        let (pos, dpos1, dpos2) = cosine_with_grad(&fwd.emb[s1], &fwd.emb[s2]);
        for (anchor, t) in [(s1, neg.t1.slot()), (s2, neg.t2.slot())] {
            let (neg_cos, d_anchor, d_t) = cosine_with_grad(&fwd.emb[anchor], &fwd.emb[t]);
            let hinge = margin - pos + neg_cos;
            if hinge > T::zero() {
                total += hinge;
                add(s1, -scale, &dpos1);
                add(s2, -scale, &dpos2);
                add(anchor, scale, &d_anchor);
                add(t, scale, &d_t);
            }
        }
    }

    let mut grad = ParamGrad::zeros(dim);
    for (slot, up) in upstream.iter().enumerate() {
        if let Some(up) = up {
            let g = model.embed_gradient_with_pre(&batch.cvs[slot], &fwd.pre[slot], up)?;
            grad.accumulate(&g);
        }
    }

    let lambda = T::of(config.lambda);
    let touched = batch.touched_rows();
    let two_lambda = lambda + lambda;
    axpy(&mut grad.bias, two_lambda, model.bias());
    for &r in &touched {
        let row = model.row(r);
        axpy(grad.touch_row(r), two_lambda, row);
    }

    let loss = total * scale;
    let objective = loss + lambda * regularizer(model, &touched);
    Ok((BatchObjective { loss, objective }, grad))
}

/// Result of one optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome<T> {
    pub loss: T,
    pub objective: T,
    pub negatives: Vec<Negatives>,
}

/// Encodes and embeds the batch, picks negatives, and applies one Adam step
/// to the bias and the touched rows of `W`.
pub fn batch_step<T: Scalar>(
    pairs: &[(String, String)],
    model: &mut Model<T>,
    vocab: &NGramVocab,
    config: &TrainConfig,
    adam: &mut AdamState<T>,
    rng: &mut ChaCha8Rng,
) -> Result<BatchOutcome<T>> {
    if pairs.len() < 2 {
        return Err(Error::CannotSampleNegatives(pairs.len()));
    }
    let batch = EncodedBatch::new(pairs, vocab, config.case);
    let fwd = forward(model, &batch)?;
    let negatives = choose_negatives(&batch, &fwd.emb, config, rng)?;
    let (value, grad) = batch_gradient(model, &batch, &fwd, &negatives, config)?;
    adam.step(model, &grad, adam_params(config));
    let finite = model.bias().iter().all(|x| x.is_finite())
        && grad.rows.keys().all(|&r| model.row(r).iter().all(|x| x.is_finite()));
    if !finite {
        return Err(Error::NonFinite { epoch: 0, batch: 0 });
    }
    Ok(BatchOutcome { loss: value.loss, objective: value.objective, negatives })
}

fn adam_params(config: &TrainConfig) -> AdamParams {
    AdamParams {
        learning_rate: config.learning_rate,
        beta1: config.adam_beta1,
        beta2: config.adam_beta2,
        epsilon: config.adam_epsilon,
    }
}

const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_NEGATIVES: u64 = 3;
pub(crate) const STREAM_AUDIT: u64 = 4;

/// Deterministic generator for one (seed, purpose, epoch) triple.
pub(crate) fn stream_rng(seed: u64, purpose: u64, epoch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((purpose << 48) ^ epoch);
    rng
}

/// Pair order for 0-based `epoch`; a pure function of its arguments.
pub fn epoch_permutation(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, STREAM_SHUFFLE, epoch as u64));
    order
}

/// Order in which `train` visits pairs in 0-based `epoch`.
pub fn epoch_order(config: &TrainConfig, epoch: usize, n: usize) -> Vec<usize> {
    if config.curriculum && epoch == 0 {
        (0..n).collect()
    } else {
        epoch_permutation(config.seed, epoch, n)
    }
}

/// Initial model for `config`: uniform `W` from the seed, zero bias.
pub fn init_model<T: Scalar>(vocab: &NGramVocab, config: &TrainConfig) -> Model<T> {
    let mut rng = stream_rng(config.seed, STREAM_INIT, 0);
    Model::init_uniform(vocab, config.dim, config.activation, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub examples_seen: u64,
    pub metric: String,
    pub value: f64,
}

/// Metrics recorded against the number of training pairs consumed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingCurve {
    pub points: Vec<CurvePoint>,
}

impl TrainingCurve {
    fn push(&mut self, examples_seen: u64, metric: impl Into<String>, value: f64) {
        debug_assert!(self.points.last().is_none_or(|p| p.examples_seen <= examples_seen));
        self.points.push(CurvePoint { examples_seen, metric: metric.into(), value });
    }

    /// `examples_seen<TAB>metric<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        self.points.iter().map(|p| format!("{}\t{}\t{}\n", p.examples_seen, p.metric, p.value)).collect()
    }
}

/// Callbacks invoked by [`train`]. Every method has a no-op default.
pub trait TrainObserver<T> {
    fn on_epoch_start(&mut self, _epoch: usize, _order: &[usize]) {}

    fn on_batch(&mut self, _epoch: usize, _batch: usize, _loss: f64) {}

    /// Named metrics to record on the training curve.
    fn evaluate(&mut self, _model: &Model<T>) -> Vec<(String, f64)> {
        Vec::new()
    }
}

/// Observer that does nothing.
pub struct NoObserver;

impl<T> TrainObserver<T> for NoObserver {}

#[derive(Debug, Clone)]
pub struct TrainOutput<T> {
    pub model: Model<T>,
    pub adam: AdamState<T>,
    pub curve: TrainingCurve,
    /// Mean batch hinge loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Trains a fresh model on `dataset`.
///
/// The curve receives a `train_loss` point at the end of every epoch and the
/// observer's metrics every `eval_every` epochs' worth of pairs.
pub fn train<T: Scalar>(
    dataset: &PairDataset,
    vocab: &NGramVocab,
    config: &TrainConfig,
    observer: &mut dyn TrainObserver<T>,
) -> Result<TrainOutput<T>> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if vocab.is_empty() {
        return Err(Error::EmptyVocab);
    }
    let model = init_model(vocab, config);
    train_from(model, dataset, vocab, config, observer)
}

/// As [`train`], continuing from an existing model with fresh optimizer state.
pub fn train_from<T: Scalar>(
    mut model: Model<T>,
    dataset: &PairDataset,
    vocab: &NGramVocab,
    config: &TrainConfig,
    observer: &mut dyn TrainObserver<T>,
) -> Result<TrainOutput<T>> {
    config.validate()?;
    model.check_vocab(vocab)?;
    let n = dataset.len();
    let mut adam = AdamState::new();
    let mut curve = TrainingCurve::default();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let eval_interval = ((config.eval_every * n as f64).round() as u64).max(1);
    let mut next_eval = eval_interval;
    let mut seen: u64 = 0;
    let pairs = dataset.pairs();

    for epoch in 0..config.epochs {
        let order = epoch_order(config, epoch, n);
        observer.on_epoch_start(epoch, &order);
        let mut rng = stream_rng(config.seed, STREAM_NEGATIVES, epoch as u64);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            if chunk.len() < 2 {
                continue;
            }
            let batch: Vec<(String, String)> = chunk.iter().map(|&i| pairs[i].clone()).collect();
            let outcome = batch_step(&batch, &mut model, vocab, config, &mut adam, &mut rng).map_err(|e| match e {
                Error::NonFinite { .. } => Error::NonFinite { epoch, batch: b },
                other => other,
            })?;
            let loss = outcome.loss.as_f64();
            observer.on_batch(epoch, b, loss);
            loss_sum += loss;
            batches += 1;
            seen += chunk.len() as u64;
            if seen >= next_eval {
                for (name, value) in observer.evaluate(&model) {
                    curve.push(seen, name, value);
                }
                while next_eval <= seen {
                    next_eval += eval_interval;
                }
            }
        }
        let mean = if batches > 0 { loss_sum / batches as f64 } else { 0.0 };
        log::info!("epoch {} mean batch loss {mean:.6}", epoch + 1);
        curve.push(seen, "train_loss", mean);
        epoch_losses.push(mean);
    }
    Ok(TrainOutput { model, adam, curve, epoch_losses })
}
