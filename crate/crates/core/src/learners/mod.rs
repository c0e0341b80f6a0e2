//! Weak learners for the best-response step.
//!
//! Stumps minimise weighted zero-one loss exactly. Linear models and
//! one-hidden-layer ReLU networks minimise the weighted logistic surrogate by
//! SGD (see [`sgd`]); everything downstream scores them with zero-one loss.

mod sgd;
mod stump;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{RaiError, Result};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use sgd::Model;

/// A trained classifier. The JSON form stores dense arrays row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound = "S: Scalar")]
pub enum Hypothesis<S> {
    /// `x[feature] <= threshold ? left : right`.
    Stump {
        feature: usize,
        threshold: S,
        left: usize,
        right: usize,
    },
    /// Scores `W x + b` with `W` of shape `classes × dim`.
    Linear {
        classes: usize,
        dim: usize,
        weights: Vec<S>,
        bias: Vec<S>,
    },
    /// Scores `W2 relu(W1 x + b1) + b2`.
    Mlp {
        dim: usize,
        hidden: usize,
        classes: usize,
        w1: Vec<S>,
        b1: Vec<S>,
        w2: Vec<S>,
        b2: Vec<S>,
    },
}

fn argmax_lowest<S: Scalar>(scores: &[S]) -> usize {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    best
}

impl<S: Scalar> Hypothesis<S> {
    pub fn constant(label: usize) -> Self {
        Hypothesis::Stump {
            feature: 0,
            threshold: S::zero(),
            left: label,
            right: label,
        }
    }

    fn check_dim(&self, x: &[S]) -> Result<()> {
        let needed = match self {
            Hypothesis::Stump { feature, left, right, .. } => {
                if left == right {
                    return Ok(());
                }
                feature + 1
            }
            Hypothesis::Linear { dim, .. } | Hypothesis::Mlp { dim, .. } => *dim,
        };
        let ok = match self {
            Hypothesis::Stump { .. } => x.len() >= needed,
            _ => x.len() == needed,
        };
        if ok {
            Ok(())
        } else {
            Err(RaiError::DimensionMismatch { expected: needed, got: x.len() })
        }
    }

    /// Per-class scores. Stumps return a one-hot vector over `max(left, right) + 1` classes.
    pub fn scores(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_dim(x)?;
        Ok(match self {
            Hypothesis::Stump { left, right, .. } => {
                let mut s = vec![S::zero(); left.max(right) + 1];
                s[self.predict_unchecked(x)] = S::one();
                s
            }
            Hypothesis::Linear { .. } => LinearModel::from_hypothesis(self).logits(x),
            Hypothesis::Mlp { .. } => MlpModel::from_hypothesis(self).logits(x),
        })
    }

    pub fn predict(&self, x: &[S]) -> Result<usize> {
        self.check_dim(x)?;
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[S]) -> usize {
        match self {
            Hypothesis::Stump { feature, threshold, left, right } => {
                if left == right || x[*feature] <= *threshold {
                    *left
                } else {
                    *right
                }
            }
            Hypothesis::Linear { .. } => argmax_lowest(&LinearModel::from_hypothesis(self).logits(x)),
            Hypothesis::Mlp { .. } => argmax_lowest(&MlpModel::from_hypothesis(self).logits(x)),
        }
    }

    /// Labels for every sample of `dataset`.
    pub fn predict_all(&self, dataset: &Dataset<S>) -> Result<Vec<usize>> {
        if let Some(s) = dataset.samples().first() {
            self.check_dim(&s.features)?;
        }
        Ok(match self {
            Hypothesis::Stump { .. } => dataset.samples().iter().map(|s| self.predict_unchecked(&s.features)).collect(),
            Hypothesis::Linear { .. } => {
                let m = LinearModel::from_hypothesis(self);
                dataset.samples().iter().map(|s| argmax_lowest(&m.logits(&s.features))).collect()
            }
            Hypothesis::Mlp { .. } => {
                let m = MlpModel::from_hypothesis(self);
                dataset.samples().iter().map(|s| argmax_lowest(&m.logits(&s.features))).collect()
            }
        })
    }

    /// Re-expresses the parameters in another precision.
    pub fn cast<T: Scalar>(&self) -> Hypothesis<T> {
        let c = |v: &[S]| v.iter().map(|x| T::of(x.as_f64())).collect::<Vec<T>>();
        match self {
            Hypothesis::Stump { feature, threshold, left, right } => Hypothesis::Stump {
                feature: *feature,
                threshold: T::of(threshold.as_f64()),
                left: *left,
                right: *right,
            },
            Hypothesis::Linear { classes, dim, weights, bias } => Hypothesis::Linear {
                classes: *classes,
                dim: *dim,
                weights: c(weights),
                bias: c(bias),
            },
            Hypothesis::Mlp { dim, hidden, classes, w1, b1, w2, b2 } => Hypothesis::Mlp {
                dim: *dim,
                hidden: *hidden,
                classes: *classes,
                w1: c(w1),
                b1: c(b1),
                w2: c(w2),
                b2: c(b2),
            },
        }
    }
}

/// Zero-one loss of `h` on every sample: the hypothesis' row of the payoff matrix.
pub fn loss_row<S: Scalar>(h: &Hypothesis<S>, dataset: &Dataset<S>) -> Result<Vec<S>> {
    let preds = h.predict_all(dataset)?;
    Ok(preds
        .iter()
        .zip(dataset.samples())
        .map(|(&p, s)| if p == s.label { S::zero() } else { S::one() })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerKind {
    Stump,
    Linear,
    Mlp {
        #[serde(default = "default_hidden")]
        hidden: usize,
    },
    /// Best response restricted to a fixed finite set of hypotheses.
    Pool { hypotheses: Vec<Hypothesis<f64>> },
}

fn default_hidden() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainBudget {
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainBudget {
    fn default() -> Self {
        TrainBudget {
            iterations: 1000,
            batch_size: 32,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

impl TrainBudget {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch_size == 0 {
            return Err(RaiError::Config("budget needs iterations >= 1 and batch_size >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(RaiError::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Best response: a hypothesis approximately minimising `E_w ℓ(h(x), y)`.
pub fn best_response<S: Scalar>(
    dataset: &Dataset<S>,
    w: &[S],
    learner: &LearnerKind,
    budget: &TrainBudget,
) -> Result<Hypothesis<S>> {
    if w.len() != dataset.len() {
        return Err(RaiError::DimensionMismatch { expected: dataset.len(), got: w.len() });
    }
    budget.validate()?;
    Ok(match learner {
        LearnerKind::Stump => stump::fit_stump(dataset, w),
        LearnerKind::Linear => {
            let mut init = LinearModel::zeros(dataset.classes(), dataset.dim());
            init.bias = sgd::log_priors(dataset, w);
            sgd::train(init, dataset, w, budget).into_hypothesis()
        }
        LearnerKind::Mlp { hidden } => {
            if *hidden == 0 {
                return Err(RaiError::Config("mlp hidden width must be >= 1".into()));
            }
            let mut rng = SplitMix64::derive(budget.seed, 0x1417);
            let mut init = MlpModel::init(dataset.dim(), *hidden, dataset.classes(), &mut rng);
            for (b, p) in init.b2.iter_mut().zip(sgd::log_priors(dataset, w)) {
                *b += p;
            }
            sgd::train(init, dataset, w, budget).into_hypothesis()
        }
        LearnerKind::Pool { hypotheses } => {
            let (h, _) = pool_best_response(hypotheses, dataset, w)?;
            h
        }
    })
}

/// Lowest-index member of `pool` minimising the weighted loss. Losses within a
/// relative 1e-12 count as ties so rounding noise cannot reorder members.
pub fn pool_best_response<S: Scalar>(
    pool: &[Hypothesis<f64>],
    dataset: &Dataset<S>,
    w: &[S],
) -> Result<(Hypothesis<S>, usize)> {
    if pool.is_empty() {
        return Err(RaiError::Config("hypothesis pool is empty".into()));
    }
    let mut rows = Vec::with_capacity(pool.len());
    for h in pool {
        rows.push(loss_row(&h.cast::<S>(), dataset)?);
    }
    let k = pool_argmin(&rows, w);
    Ok((pool[k].cast(), k))
}

pub(crate) fn pool_argmin<S: Scalar>(rows: &[Vec<S>], w: &[S]) -> usize {
    let losses: Vec<S> = rows.iter().map(|r| crate::scalar::dot(r, w)).collect();
    let tie = S::of(1e-12);
    let mut best = 0;
    for (k, &l) in losses.iter().enumerate() {
        if l < losses[best] - tie * losses[best].abs().max(S::one()) {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone)]
struct LinearModel<S> {
    classes: usize,
    dim: usize,
    weights: Vec<S>,
    bias: Vec<S>,
}

impl<S: Scalar> LinearModel<S> {
    fn zeros(classes: usize, dim: usize) -> Self {
        LinearModel {
            classes,
            dim,
            weights: vec![S::zero(); classes * dim],
            bias: vec![S::zero(); classes],
        }
    }

    fn from_hypothesis(h: &Hypothesis<S>) -> Self {
        match h {
            Hypothesis::Linear { classes, dim, weights, bias } => LinearModel {
                classes: *classes,
                dim: *dim,
                weights: weights.clone(),
                bias: bias.clone(),
            },
            _ => unreachable!("not a linear hypothesis"),
        }
    }

    fn into_hypothesis(self) -> Hypothesis<S> {
        Hypothesis::Linear {
            classes: self.classes,
            dim: self.dim,
            weights: self.weights,
            bias: self.bias,
        }
    }
}

impl<S: Scalar> Model<S> for LinearModel<S> {
    fn logits(&self, x: &[S]) -> Vec<S> {
        (0..self.classes)
            .map(|c| {
                let row = &self.weights[c * self.dim..(c + 1) * self.dim];
                crate::scalar::dot(row, x) + self.bias[c]
            })
            .collect()
    }

    fn accumulate(&self, x: &[S], dlogits: &[S], grad: &mut Self) {
        for (c, &g) in dlogits.iter().enumerate() {
            let row = &mut grad.weights[c * self.dim..(c + 1) * self.dim];
            for (r, &xi) in row.iter_mut().zip(x) {
                *r += g * xi;
            }
            grad.bias[c] += g;
        }
    }

    fn zeros_like(&self) -> Self {
        LinearModel::zeros(self.classes, self.dim)
    }

    fn descend(&mut self, step: S, grad: &Self) {
        for (p, &g) in self.weights.iter_mut().zip(&grad.weights) {
            *p -= step * g;
        }
        for (p, &g) in self.bias.iter_mut().zip(&grad.bias) {
            *p -= step * g;
        }
    }
}

#[derive(Debug, Clone)]
struct MlpModel<S> {
    dim: usize,
    hidden: usize,
    classes: usize,
    w1: Vec<S>,
    b1: Vec<S>,
    w2: Vec<S>,
    b2: Vec<S>,
}

impl<S: Scalar> MlpModel<S> {
    /// Uniform in `±1/sqrt(fan_in)` for weights and biases of each layer.
    fn init(dim: usize, hidden: usize, classes: usize, rng: &mut SplitMix64) -> Self {
        let mut draw = |count: usize, fan_in: usize| -> Vec<S> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..count).map(|_| S::of((2.0 * rng.uniform() - 1.0) * bound)).collect()
        };
        let w1 = draw(hidden * dim, dim);
        let b1 = draw(hidden, dim);
        let w2 = draw(classes * hidden, hidden);
        let b2 = draw(classes, hidden);
        MlpModel { dim, hidden, classes, w1, b1, w2, b2 }
    }

    fn from_hypothesis(h: &Hypothesis<S>) -> Self {
        match h {
            Hypothesis::Mlp { dim, hidden, classes, w1, b1, w2, b2 } => MlpModel {
                dim: *dim,
                hidden: *hidden,
                classes: *classes,
                w1: w1.clone(),
                b1: b1.clone(),
                w2: w2.clone(),
                b2: b2.clone(),
            },
            _ => unreachable!("not an mlp hypothesis"),
        }
    }

    fn into_hypothesis(self) -> Hypothesis<S> {
        Hypothesis::Mlp {
            dim: self.dim,
            hidden: self.hidden,
            classes: self.classes,
            w1: self.w1,
            b1: self.b1,
            w2: self.w2,
            b2: self.b2,
        }
    }

    fn pre_activations(&self, x: &[S]) -> Vec<S> {
        (0..self.hidden)
            .map(|j| crate::scalar::dot(&self.w1[j * self.dim..(j + 1) * self.dim], x) + self.b1[j])
            .collect()
    }
}

impl<S: Scalar> Model<S> for MlpModel<S> {
    fn logits(&self, x: &[S]) -> Vec<S> {
        let h: Vec<S> = self.pre_activations(x).into_iter().map(|z| z.max(S::zero())).collect();
        (0..self.classes)
            .map(|c| crate::scalar::dot(&self.w2[c * self.hidden..(c + 1) * self.hidden], &h) + self.b2[c])
            .collect()
    }

    fn accumulate(&self, x: &[S], dlogits: &[S], grad: &mut Self) {
        let z = self.pre_activations(x);
        let h: Vec<S> = z.iter().map(|&v| v.max(S::zero())).collect();
        let mut dh = vec![S::zero(); self.hidden];
        for (c, &g) in dlogits.iter().enumerate() {
            let off = c * self.hidden;
            for j in 0..self.hidden {
                grad.w2[off + j] += g * h[j];
                dh[j] += g * self.w2[off + j];
            }
            grad.b2[c] += g;
        }
        for j in 0..self.hidden {
            if z[j] <= S::zero() {
                continue;
            }
            let off = j * self.dim;
            for (i, &xi) in x.iter().enumerate() {
                grad.w1[off + i] += dh[j] * xi;
            }
            grad.b1[j] += dh[j];
        }
    }

    fn zeros_like(&self) -> Self {
        MlpModel {
            dim: self.dim,
            hidden: self.hidden,
            classes: self.classes,
            w1: vec![S::zero(); self.w1.len()],
            b1: vec![S::zero(); self.b1.len()],
            w2: vec![S::zero(); self.w2.len()],
            b2: vec![S::zero(); self.b2.len()],
        }
    }

    fn descend(&mut self, step: S, grad: &Self) {
        let pairs = [
            (&mut self.w1, &grad.w1),
            (&mut self.b1, &grad.b1),
            (&mut self.w2, &grad.w2),
            (&mut self.b2, &grad.b2),
        ];
        for (p, g) in pairs {
            for (pi, &gi) in p.iter_mut().zip(g) {
                *pi -= step * gi;
            }
        }
    }
}
