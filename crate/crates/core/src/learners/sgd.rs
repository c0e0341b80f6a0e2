//! Weighted multiclass-logistic training by minibatch SGD.
//!
//! Minibatch indices are drawn i.i.d. from `w` itself, so the plain minibatch
//! gradient is unbiased for the `w`-weighted loss without importance factors
//! (which explode once the adversary concentrates its weights). The logistic loss is only the training device: every
//! [`CHECKPOINT_EVERY`] iterations the weighted *zero-one* loss is evaluated
//! and the best parameters seen (initialisation included) are kept.

use super::TrainBudget;
use crate::data::Dataset;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

pub(crate) const CHECKPOINT_EVERY: usize = 100;

/// A differentiable score model `x -> logits`.
pub(crate) trait Model<S: Scalar>: Clone {
    fn logits(&self, x: &[S]) -> Vec<S>;
    /// Adds `d loss / d params` for upstream gradient `dlogits` into `grad`.
    fn accumulate(&self, x: &[S], dlogits: &[S], grad: &mut Self);
    fn zeros_like(&self) -> Self;
    /// `self -= step * grad`.
    fn descend(&mut self, step: S, grad: &Self);
}

/// Softmax probabilities of `logits`, max-shifted.
pub(crate) fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    let max = logits.iter().copied().fold(S::neg_infinity(), S::max);
    let mut p: Vec<S> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: S = p.iter().copied().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// `-log softmax(logits)[label]`.
#[cfg(test)]
pub(crate) fn cross_entropy<S: Scalar>(logits: &[S], label: usize) -> S {
    crate::scalar::log_sum_exp(logits.iter().copied()) - logits[label]
}

fn argmax<S: Scalar>(v: &[S]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = k;
        }
    }
    best
}

/// `Σ_i w_i · 1[argmax model(x_i) ≠ y_i]`.
pub(crate) fn weighted_error<S: Scalar, M: Model<S>>(model: &M, dataset: &Dataset<S>, w: &[S]) -> S {
    dataset
        .samples()
        .iter()
        .zip(w)
        .filter(|(s, &wi)| wi > S::zero() && argmax(&model.logits(&s.features)) != s.label)
        .map(|(_, &wi)| wi)
        .sum()
}

/// Log of the `w`-weighted class priors, floored so absent classes stay finite.
pub(crate) fn log_priors<S: Scalar>(dataset: &Dataset<S>, w: &[S]) -> Vec<S> {
    let mut mass = vec![S::zero(); dataset.classes()];
    for (s, &wi) in dataset.samples().iter().zip(w) {
        mass[s.label] += wi;
    }
    let floor = S::of(1e-6);
    mass.into_iter().map(|m| m.max(floor).ln()).collect()
}

pub(crate) fn train<S: Scalar, M: Model<S>>(init: M, dataset: &Dataset<S>, w: &[S], budget: &TrainBudget) -> M {
    let n = dataset.len();
    let mut cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &wi in w {
        acc += wi.as_f64().max(0.0);
        cdf.push(acc);
    }
    let batch = budget.batch_size.clamp(1, n);
    let step = S::of(budget.learning_rate) / S::of_usize(batch);
    let mut rng = SplitMix64::new(budget.seed);

    let mut model = init;
    let mut best_loss = weighted_error(&model, dataset, w);
    let mut best = model.clone();
    let mut grad = model.zeros_like();
    for it in 0..budget.iterations {
        grad = grad.zeros_like();
        for _ in 0..batch {
            let u = rng.uniform() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(n - 1);
            let sample = dataset.sample(i);
            let mut d = softmax(&model.logits(&sample.features));
            d[sample.label] -= S::one();
            model.accumulate(&sample.features, &d, &mut grad);
        }
        model.descend(step, &grad);

        if (it + 1) % CHECKPOINT_EVERY == 0 || it + 1 == budget.iterations {
            let loss = weighted_error(&model, dataset, w);
            if loss < best_loss {
                best_loss = loss;
                best = model.clone();
            }
        }
    }
    best
}
