//! Negative example selection within a mini-batch.

use rand::Rng;

use super::config::{NegativePool, Sampling};
use crate::error::{Error, Result};
use crate::model::cosine_unchecked;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    First,
    Second,
}

/// A phrase in the batch: pair index plus side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhraseRef {
    pub pair: usize,
    pub side: Side,
}

impl PhraseRef {
    /// Position in the interleaved phrase list `[p0.x1, p0.x2, p1.x1, ...]`.
    pub fn slot(self) -> usize {
        2 * self.pair + matches!(self.side, Side::Second) as usize
    }
}

/// Negatives for one pair: `t1` contrasts with its first phrase, `t2` with its second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Negatives {
    pub t1: PhraseRef,
    pub t2: PhraseRef,
}

/// Borrowed view of one batch pair for negative selection.
#[derive(Debug, Clone, Copy)]
pub struct PairView<'a, T> {
    /// Normalized text of each side, used to exclude string-equal candidates.
    pub key1: &'a str,
    pub key2: &'a str,
    pub emb1: &'a [T],
    pub emb2: &'a [T],
}

impl<'a, T> PairView<'a, T> {
    fn key(&self, side: Side) -> &'a str {
        match side {
            Side::First => self.key1,
            Side::Second => self.key2,
        }
    }

    fn emb(&self, side: Side) -> &'a [T] {
        match side {
            Side::First => self.emb1,
            Side::Second => self.emb2,
        }
    }
}

/// Picks `t1`/`t2` for every pair.
///
/// Candidates come from other pairs only, in ascending pair order (first
/// side before second under [`NegativePool::BothSides`]). A candidate whose
/// text equals either phrase of the current pair is skipped unless that would
/// leave nothing. `Max` keeps the earliest candidate on cosine ties. Under
/// `Mix` the rng is consumed per pair as: coin for `t1`, draw for `t1` if
/// the coin chose random, then the same for `t2`.
pub fn select_negatives<T: Scalar, R: Rng>(
    batch: &[PairView<'_, T>],
    mode: Sampling,
    pool: NegativePool,
    rng: &mut R,
) -> Result<Vec<Negatives>> {
    if batch.len() < 2 {
        return Err(Error::CannotSampleNegatives(batch.len()));
    }
    let mut out = Vec::with_capacity(batch.len());
    let mut candidates = Vec::with_capacity(2 * batch.len());
    for (i, pair) in batch.iter().enumerate() {
        let mut pick = |side: Side, rng: &mut R| {
            candidate_pool(batch, i, side, pool, &mut candidates);
            let use_max = match mode {
                Sampling::Max => true,
                Sampling::Mix => rng.gen_bool(0.5),
            };
            if use_max {
                argmax(pair.emb(side), batch, &candidates)
            } else {
                candidates[rng.gen_range(0..candidates.len())]
            }
        };
        let t1 = pick(Side::First, rng);
        let t2 = pick(Side::Second, rng);
        out.push(Negatives { t1, t2 });
    }
    Ok(out)
}

fn candidate_pool<T>(batch: &[PairView<'_, T>], i: usize, side: Side, pool: NegativePool, out: &mut Vec<PhraseRef>) {
    let sides: &[Side] = match (pool, side) {
        (NegativePool::BothSides, _) => &[Side::First, Side::Second],
        (NegativePool::SameSide, Side::First) => &[Side::First],
        (NegativePool::SameSide, Side::Second) => &[Side::Second],
    };
    let own = &batch[i];
    let all = (0..batch.len())
        .filter(|&j| j != i)
        .flat_map(|j| sides.iter().map(move |&s| PhraseRef { pair: j, side: s }));
    out.clear();
    out.extend(all.clone().filter(|c| {
        let key = batch[c.pair].key(c.side);
        key != own.key1 && key != own.key2
    }));
    if out.is_empty() {
        out.extend(all);
    }
}

fn argmax<T: Scalar>(query: &[T], batch: &[PairView<'_, T>], candidates: &[PhraseRef]) -> PhraseRef {
    let mut best = candidates[0];
    let mut best_cos = cosine_unchecked(query, batch[best.pair].emb(best.side));
    for &c in &candidates[1..] {
        let cos = cosine_unchecked(query, batch[c.pair].emb(c.side));
        if cos > best_cos {
            best = c;
            best_cos = cos;
        }
    }
    best
}
