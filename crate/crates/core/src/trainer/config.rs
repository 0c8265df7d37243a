use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::Activation;
use crate::vocab::CaseMode;

/// How negatives are picked from the mini-batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Most similar phrase under the current model.
    #[default]
    Max,
    /// A fair coin per pair and side chooses between `Max` and a uniform draw.
    Mix,
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Sampling::Max),
            "mix" => Ok(Sampling::Mix),
            other => Err(Error::InvalidConfig(format!("unknown sampling {other:?}"))),
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampling::Max => "max",
            Sampling::Mix => "mix",
        })
    }
}

/// Which phrases compete as negatives for a given side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativePool {
    /// `t1` among first phrases of other pairs, `t2` among second phrases.
    #[default]
    SameSide,
    /// Both phrases of every other pair are candidates for either side.
    BothSides,
}

impl FromStr for NegativePool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "same-side" => Ok(NegativePool::SameSide),
            "both-sides" => Ok(NegativePool::BothSides),
            other => Err(Error::InvalidConfig(format!("unknown negative pool {other:?}"))),
        }
    }
}

impl fmt::Display for NegativePool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NegativePool::SameSide => "same-side",
            NegativePool::BothSides => "both-sides",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub activation: Activation,
    pub case: CaseMode,
    pub margin: f64,
    pub lambda: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub sampling: Sampling,
    pub pool: NegativePool,
    pub epochs: usize,
    pub seed: u64,
    /// Consume the first epoch in file order instead of shuffling it.
    pub curriculum: bool,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Fraction of an epoch between evaluation-hook calls.
    pub eval_every: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            activation: Activation::Tanh,
            case: CaseMode::Lowercase,
            margin: 0.4,
            lambda: 1e-6,
            learning_rate: 0.001,
            batch_size: 100,
            sampling: Sampling::Max,
            pool: NegativePool::SameSide,
            epochs: 10,
            seed: 0,
            curriculum: false,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            eval_every: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dim == 0 {
            return fail("dim must be positive".into());
        }
        if self.activation == Activation::Relu {
            return fail("relu is not supported for similarity training; use tanh or linear".into());
        }
        if !positive(self.margin) {
            return fail(format!("margin must be > 0, got {}", self.margin));
        }
        if !(self.lambda == 0.0 || positive(self.lambda)) {
            return fail(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !positive(self.learning_rate) {
            return fail(format!("learning rate must be > 0, got {}", self.learning_rate));
        }
        if self.batch_size < 2 {
            return fail(format!("batch size must be at least 2, got {}", self.batch_size));
        }
        for (name, beta) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(beta > 0.0 && beta < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {beta}"));
            }
        }
        if !positive(self.adam_epsilon) {
            return fail(format!("adam_epsilon must be > 0, got {}", self.adam_epsilon));
        }
        if !positive(self.eval_every) {
            return fail(format!("eval_every must be > 0, got {}", self.eval_every));
        }
        Ok(())
    }
}

/// Finite and strictly greater than zero; false for NaN.
fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}
