//! The embedding function `h(b + Σ count(v) · W[v])`, cosine similarity, and
//! the gradient of an embedding with respect to `W` and `b`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Scalar, NORM_FLOOR};
use crate::vocab::{CountVector, NGramVocab};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    Linear,
    #[default]
    Tanh,
    /// Not accepted for similarity training; see [`crate::trainer::TrainConfig::validate`].
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Linear => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(T::zero()),
        }
    }

    /// Derivative at pre-activation `x`.
    #[inline]
    pub fn derivative<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Linear => T::one(),
            Activation::Tanh => {
                let h = x.tanh();
                T::one() - h * h
            }
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Tanh => 1,
            Activation::Relu => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Linear),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Relu),
            _ => None,
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::InvalidConfig(format!("unknown activation {other:?}"))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

/// One vector per vocabulary n-gram plus a shared bias.
///
/// `W` is stored row-major: row `v` is `weights[v * dim..(v + 1) * dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    weights: Vec<T>,
    bias: Vec<T>,
    dim: usize,
    activation: Activation,
    fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    pub values: Vec<T>,
    /// In-vocabulary n-gram tokens that contributed, with multiplicity.
    pub used_ngrams: u64,
    /// Set when no n-gram was in the vocabulary, so the embedding is `h(b)`.
    pub oov_fallback: bool,
}

/// Sparse gradient over (`b`, rows of `W`). Rows iterate in ascending index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad<T> {
    pub bias: Vec<T>,
    pub rows: BTreeMap<usize, Vec<T>>,
}

impl<T: Scalar> ParamGrad<T> {
    pub fn zeros(dim: usize) -> Self {
        ParamGrad { bias: vec![T::zero(); dim], rows: BTreeMap::new() }
    }

    /// `self += other`.
    pub fn accumulate(&mut self, other: &ParamGrad<T>) {
        axpy(&mut self.bias, T::one(), &other.bias);
        for (&row, g) in &other.rows {
            let dst = self.rows.entry(row).or_insert_with(|| vec![T::zero(); g.len()]);
            axpy(dst, T::one(), g);
        }
    }

    pub fn touch_row(&mut self, row: usize) -> &mut Vec<T> {
        let dim = self.bias.len();
        self.rows.entry(row).or_insert_with(|| vec![T::zero(); dim])
    }
}

#[inline]
pub(crate) fn axpy<T: Scalar>(dst: &mut [T], alpha: T, src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}

impl<T: Scalar> Model<T> {
    /// All-zero parameters bound to `vocab`.
    pub fn zeros(vocab: &NGramVocab, dim: usize, activation: Activation) -> Self {
        Model {
            weights: vec![T::zero(); vocab.len() * dim],
            bias: vec![T::zero(); dim],
            dim,
            activation,
            fingerprint: vocab.fingerprint(),
        }
    }

    /// `W` entries i.i.d. uniform on `[-0.5/d, 0.5/d]`, `b = 0`.
    pub fn init_uniform<R: Rng>(vocab: &NGramVocab, dim: usize, activation: Activation, rng: &mut R) -> Self {
        let scale = 0.5 / dim as f64;
        let weights = (0..vocab.len() * dim).map(|_| T::of(rng.gen_range(-scale..=scale))).collect();
        Model { weights, bias: vec![T::zero(); dim], dim, activation, fingerprint: vocab.fingerprint() }
    }

    /// Assembles a model from raw parameters. `weights` is row-major with
    /// `dim` columns.
    pub fn from_parts(
        weights: Vec<T>,
        bias: Vec<T>,
        activation: Activation,
        fingerprint: u64,
    ) -> Result<Self> {
        let dim = bias.len();
        if dim == 0 || !weights.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { left: weights.len(), right: dim });
        }
        Ok(Model { weights, bias, dim, activation, fingerprint })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.weights.len() / self.dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    pub fn row(&self, v: usize) -> &[T] {
        &self.weights[v * self.dim..(v + 1) * self.dim]
    }

    pub fn row_mut(&mut self, v: usize) -> &mut [T] {
        &mut self.weights[v * self.dim..(v + 1) * self.dim]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Number of trainable parameters, `d + d|V|`.
    pub fn num_params(&self) -> usize {
        self.bias.len() + self.weights.len()
    }

    /// Errors unless the model was built for this vocabulary.
    pub fn check_vocab(&self, vocab: &NGramVocab) -> Result<()> {
        if vocab.len() != self.rows() || vocab.fingerprint() != self.fingerprint {
            return Err(Error::VocabModelMismatch(format!(
                "model has {} rows and fingerprint {:016x}, vocabulary has {} entries and fingerprint {:016x}",
                self.rows(),
                self.fingerprint,
                vocab.len(),
                vocab.fingerprint()
            )));
        }
        Ok(())
    }

    /// Converts every parameter to another precision.
    pub fn cast<U: Scalar>(&self) -> Model<U> {
        let conv = |x: &T| U::of(x.as_f64());
        Model {
            weights: self.weights.iter().map(conv).collect(),
            bias: self.bias.iter().map(conv).collect(),
            dim: self.dim,
            activation: self.activation,
            fingerprint: self.fingerprint,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|x| x.is_finite())
    }

    fn check_indices(&self, cv: &CountVector) -> Result<()> {
        match cv.max_index() {
            Some(max) if max >= self.rows() => Err(Error::VocabModelMismatch(format!(
                "n-gram index {max} out of range for {} rows",
                self.rows()
            ))),
            _ => Ok(()),
        }
    }

    /// `b + Σ count(v) · W[v]`.
    pub fn pre_activation(&self, cv: &CountVector) -> Result<Vec<T>> {
        self.check_indices(cv)?;
        let mut acc = self.bias.clone();
        for (v, c) in cv.iter() {
            axpy(&mut acc, T::of_count(c), self.row(v));
        }
        Ok(acc)
    }

    pub fn embed(&self, cv: &CountVector) -> Result<Embedding<T>> {
        let pre = self.pre_activation(cv)?;
        Ok(self.finish_embedding(cv, &pre))
    }

    pub(crate) fn finish_embedding(&self, cv: &CountVector, pre: &[T]) -> Embedding<T> {
        let used = cv.total();
        Embedding {
            values: pre.iter().map(|&x| self.activation.apply(x)).collect(),
            used_ngrams: used,
            oov_fallback: used == 0,
        }
    }

    /// Backpropagates `upstream = ∂loss/∂embedding` into `b` and the rows in `cv`.
    pub fn embed_gradient(&self, cv: &CountVector, upstream: &[T]) -> Result<ParamGrad<T>> {
        let pre = self.pre_activation(cv)?;
        self.embed_gradient_with_pre(cv, &pre, upstream)
    }

    /// As [`Model::embed_gradient`] with a pre-activation computed earlier.
    pub fn embed_gradient_with_pre(&self, cv: &CountVector, pre: &[T], upstream: &[T]) -> Result<ParamGrad<T>> {
        if upstream.len() != self.dim {
            return Err(Error::DimensionMismatch { left: upstream.len(), right: self.dim });
        }
        self.check_indices(cv)?;
        let delta: Vec<T> =
            upstream.iter().zip(pre).map(|(&u, &x)| u * self.activation.derivative(x)).collect();
        let rows = cv
            .iter()
            .map(|(v, c)| {
                let c = T::of_count(c);
                (v, delta.iter().map(|&g| c * g).collect())
            })
            .collect();
        Ok(ParamGrad { bias: delta, rows })
    }
}

/// `u·v / (‖u‖‖v‖)`, or 0 when either norm is below 1e-12.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { left: u.len(), right: v.len() });
    }
    Ok(cosine_unchecked(u, v))
}

pub(crate) fn cosine_unchecked<T: Scalar>(u: &[T], v: &[T]) -> T {
    let nu = norm(u);
    let nv = norm(v);
    let floor = T::of(NORM_FLOOR);
    if nu < floor || nv < floor {
        return T::zero();
    }
    dot(u, v) / (nu * nv)
}

/// Cosine together with its partial derivatives with respect to `u` and `v`.
/// Both derivatives are zero on the zero-norm branch.
pub(crate) fn cosine_with_grad<T: Scalar>(u: &[T], v: &[T]) -> (T, Vec<T>, Vec<T>) {
    let nu = norm(u);
    let nv = norm(v);
    let floor = T::of(NORM_FLOOR);
    if nu < floor || nv < floor {
        return (T::zero(), vec![T::zero(); u.len()], vec![T::zero(); v.len()]);
    }
    let c = dot(u, v) / (nu * nv);
    let inv = T::one() / (nu * nv);
    let cu = c / (nu * nu);
    let cv = c / (nv * nv);
    let du = u.iter().zip(v).map(|(&a, &b)| b * inv - cu * a).collect();
    let dv = u.iter().zip(v).map(|(&a, &b)| a * inv - cv * b).collect();
    (c, du, dv)
}
