//! Character n-gram compositional embeddings.
//!
//! A piece of text is padded with boundary spaces, broken into character
//! n-grams, and embedded as `h(b + Σ count(v) · W[v])` where `W` holds one
//! learned vector per n-gram in the vocabulary. Models are trained on
//! paraphrase pairs with a margin-based contrastive objective and evaluated
//! with rank and product-moment correlations.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the precision used for training (`f64`)
//! and persistence (`f32`).

pub mod analyzer;
pub mod error;
pub mod evaluator;
pub mod io;
pub mod model;
pub mod scalar;
pub mod trainer;
pub mod vocab;

pub use error::{Error, ErrorKind, Result};
pub use model::{cosine, Activation, Embedding, Model, ParamGrad};
pub use scalar::Scalar;
pub use vocab::{CaseMode, CharSeq, CountVector, NGramVocab, Orders, VocabEntry, VocabPolicy};

/// Training precision.
pub type Model64 = Model<f64>;
/// Storage precision; what [`io::load_model`] returns.
pub type Model32 = Model<f32>;
pub type Embedding64 = Embedding<f64>;
pub type Embedding32 = Embedding<f32>;
pub type AdamState64 = trainer::AdamState<f64>;
pub type WorkingVocab64 = analyzer::WorkingVocab<f64>;
