//! Lazy (sparse) Adam: moments are kept only for parameters that have
//! received a gradient, and only those parameters are updated in a step.

use std::collections::HashMap;

use crate::model::{Model, ParamGrad};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
struct Moments<T> {
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Scalar> Moments<T> {
    fn zeros(dim: usize) -> Self {
        Moments { m: vec![T::zero(); dim], v: vec![T::zero(); dim] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    bias: Option<Moments<T>>,
    rows: HashMap<usize, Moments<T>>,
    t: u64,
}

impl<T> Default for AdamState<T> {
    fn default() -> Self {
        AdamState { bias: None, rows: HashMap::new(), t: 0 }
    }
}

impl<T: Scalar> AdamState<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of steps taken.
    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// Rows with moment estimates.
    pub fn tracked_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn tracks_bias(&self) -> bool {
        self.bias.is_some()
    }

    /// One bias-corrected Adam step over the parameters present in `grad`.
    pub fn step(&mut self, model: &mut Model<T>, grad: &ParamGrad<T>, p: AdamParams) {
        self.t += 1;
        let b1 = T::of(p.beta1);
        let b2 = T::of(p.beta2);
        let bc1 = T::one() - T::of(p.beta1.powi(self.t as i32));
        let bc2 = T::one() - T::of(p.beta2.powi(self.t as i32));
        let lr = T::of(p.learning_rate);
        let eps = T::of(p.epsilon);
        let dim = model.dim();

        let update = |params: &mut [T], g: &[T], mom: &mut Moments<T>| {
            for k in 0..params.len() {
                mom.m[k] = b1 * mom.m[k] + (T::one() - b1) * g[k];
                mom.v[k] = b2 * mom.v[k] + (T::one() - b2) * g[k] * g[k];
                let m_hat = mom.m[k] / bc1;
                let v_hat = mom.v[k] / bc2;
                params[k] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };

        let bias_mom = self.bias.get_or_insert_with(|| Moments::zeros(dim));
        update(model.bias_mut(), &grad.bias, bias_mom);
        for (&row, g) in &grad.rows {
            let mom = self.rows.entry(row).or_insert_with(|| Moments::zeros(dim));
            update(model.row_mut(row), g, mom);
        }
    }
}
