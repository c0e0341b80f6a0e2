//! Reference baselines: ERM, classic AdaBoost and online group DRO.

use super::{SolverConfig, SolverTrace, TraceRecord};
use crate::data::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{RaiError, Result};
use crate::learners::{best_response, loss_row, LearnerKind, TrainBudget};
use crate::rng::SplitMix64;
use crate::scalar::{dot, log_sum_exp, Scalar};
use crate::uncertainty::UncertaintySet;

/// Largest coefficient handed out when a weak learner is perfect.
fn max_coefficient() -> f64 {
    1e9f64.ln()
}

fn round_budget(budget: &TrainBudget, seed: u64, round: usize) -> TrainBudget {
    TrainBudget {
        seed: SplitMix64::derive(seed ^ budget.seed, round as u64).next_u64(),
        ..*budget
    }
}

fn softmax_of_logs<S: Scalar>(logs: &[S]) -> Vec<S> {
    let z = log_sum_exp(logs.iter().copied());
    logs.iter().map(|&l| (l - z).exp()).collect()
}

/// Records the randomized objective of the ensemble built so far.
struct Tracer<'a, S> {
    set: &'a UncertaintySet,
    cum: Vec<S>,
    total: S,
    trace: SolverTrace<S>,
}

impl<'a, S: Scalar> Tracer<'a, S> {
    fn new(set: &'a UncertaintySet) -> Self {
        Tracer { set, cum: vec![S::zero(); set.len()], total: S::zero(), trace: SolverTrace::default() }
    }

    fn push(&mut self, row: &[S], mass: S, eta: f64) -> Result<()> {
        self.total += mass;
        for (c, &l) in self.cum.iter_mut().zip(row) {
            *c += mass * l;
        }
        let mean: Vec<S> = if self.total > S::zero() {
            self.cum.iter().map(|&c| c / self.total).collect()
        } else {
            row.to_vec()
        };
        let round = self.trace.records.len() + 1;
        self.trace.records.push(TraceRecord {
            round,
            train_obj: self.set.linear_max(&mean)?.0,
            val_obj: None,
            alpha: mass,
            eta,
            ne_gap: None,
        });
        Ok(())
    }
}

fn erm_impl<S: Scalar>(
    dataset: &Dataset<S>,
    learner: &LearnerKind,
    budget: &TrainBudget,
    seed: u64,
    tracer: Option<&mut Tracer<S>>,
) -> Result<Ensemble<S>> {
    let n = dataset.len();
    let w = vec![S::one() / S::of_usize(n); n];
    let h = best_response(dataset, &w, learner, &round_budget(budget, seed, 1))?;
    if let Some(tr) = tracer {
        tr.push(&loss_row(&h, dataset)?, S::one(), 0.0)?;
    }
    Ensemble::uniform(vec![h])
}

/// A single best response to the empirical distribution.
pub fn erm<S: Scalar>(dataset: &Dataset<S>, learner: &LearnerKind, budget: &TrainBudget, seed: u64) -> Result<Ensemble<S>> {
    erm_impl(dataset, learner, budget, seed, None)
}

fn adaboost_impl<S: Scalar>(
    dataset: &Dataset<S>,
    learner: &LearnerKind,
    rounds: usize,
    budget: &TrainBudget,
    seed: u64,
    mut tracer: Option<&mut Tracer<S>>,
) -> Result<Ensemble<S>> {
    if dataset.classes() > 2 {
        return Err(RaiError::InvalidDataset(format!(
            "AdaBoost needs binary labels, data has {} classes",
            dataset.classes()
        )));
    }
    let n = dataset.len();
    let mut log_w = vec![S::zero(); n];
    let mut ensemble = Ensemble::new();
    let half = S::of(0.5);
    for t in 1..=rounds {
        let w = softmax_of_logs(&log_w);
        let h = best_response(dataset, &w, learner, &round_budget(budget, seed, t))?;
        let row = loss_row(&h, dataset)?;
        let eps = dot(&w, &row);
        if eps >= half {
            log::warn!("adaboost: weighted error {eps} >= 1/2 at round {t}; stopping");
            if ensemble.is_empty() {
                if let Some(tr) = tracer.as_deref_mut() {
                    tr.push(&row, S::one(), 0.0)?;
                }
                ensemble.push(h, S::one())?;
            }
            break;
        }
        let perfect = eps <= S::zero();
        let alpha = if perfect {
            S::of(max_coefficient())
        } else {
            half * ((S::one() - eps) / eps).ln()
        };
        if let Some(tr) = tracer.as_deref_mut() {
            tr.push(&row, alpha, 0.0)?;
        }
        ensemble.push(h, alpha)?;
        if perfect {
            break;
        }
        // exp(-α y h(x)) = exp(α (2ℓ - 1)) ∝ exp(2αℓ).
        for (lw, &l) in log_w.iter_mut().zip(&row) {
            *lw += S::of(2.0) * alpha * l;
        }
    }
    Ok(ensemble.normalized())
}

/// Binary AdaBoost with coefficients `½ ln((1-ε)/ε)`. Stops early (with a
/// warning) once the weak learner's weighted error reaches ½, and after a
/// perfect round, whose coefficient is capped at `ln 1e9`.
pub fn adaboost_classic<S: Scalar>(
    dataset: &Dataset<S>,
    learner: &LearnerKind,
    rounds: usize,
    budget: &TrainBudget,
    seed: u64,
) -> Result<Ensemble<S>> {
    adaboost_impl(dataset, learner, rounds, budget, seed, None)
}

fn gdro_impl<S: Scalar>(
    dataset: &Dataset<S>,
    learner: &LearnerKind,
    rounds: usize,
    step: f64,
    budget: &TrainBudget,
    seed: u64,
    mut tracer: Option<&mut Tracer<S>>,
    mut on_round: impl FnMut(&[S]),
) -> Result<Ensemble<S>> {
    let groups = dataset
        .group_ids()
        .ok_or_else(|| RaiError::InvalidDataset("online group DRO needs grouped data".into()))?;
    let k = dataset.groups();
    let mut sizes = vec![0usize; k];
    for &g in &groups {
        sizes[g] += 1;
    }
    // Log-weights of the non-empty groups; empty groups stay at -inf.
    let mut log_g: Vec<S> = sizes.iter().map(|&s| if s > 0 { S::zero() } else { S::neg_infinity() }).collect();
    let mut hypotheses = Vec::with_capacity(rounds);
    for t in 1..=rounds {
        let g = softmax_of_logs(&log_g);
        on_round(&g);
        let w: Vec<S> = groups.iter().map(|&j| g[j] / S::of_usize(sizes[j])).collect();
        let h = best_response(dataset, &w, learner, &round_budget(budget, seed, t))?;
        let row = loss_row(&h, dataset)?;
        let mut sums = vec![S::zero(); k];
        for (&j, &l) in groups.iter().zip(&row) {
            sums[j] += l;
        }
        for j in 0..k {
            if sizes[j] > 0 {
                log_g[j] += S::of(step) * sums[j] / S::of_usize(sizes[j]);
            }
        }
        if let Some(tr) = tracer.as_deref_mut() {
            tr.push(&row, S::one(), 0.0)?;
        }
        hypotheses.push(h);
    }
    Ensemble::uniform(hypotheses)
}

/// Exponentiated-gradient ascent on group weights `g ∝ g·exp(step · group
/// loss)`, each round training a best response to the induced sample weights.
/// Returns the uniform ensemble of all responses.
pub fn online_gdro<S: Scalar>(
    dataset: &Dataset<S>,
    learner: &LearnerKind,
    rounds: usize,
    step: f64,
    budget: &TrainBudget,
    seed: u64,
) -> Result<Ensemble<S>> {
    gdro_impl(dataset, learner, rounds, step, budget, seed, None, |_| {})
}

/// Online group DRO that also reports the group weights used in each round.
pub fn online_gdro_with_weights<S: Scalar>(
    dataset: &Dataset<S>,
    learner: &LearnerKind,
    rounds: usize,
    step: f64,
    budget: &TrainBudget,
    seed: u64,
) -> Result<(Ensemble<S>, Vec<Vec<S>>)> {
    let mut history = Vec::new();
    let e = gdro_impl(dataset, learner, rounds, step, budget, seed, None, |g| history.push(g.to_vec()))?;
    Ok((e, history))
}

// Baselines do not adapt η, so they train on the full data.
fn traced<S: Scalar>(
    dataset: &Dataset<S>,
    config: &SolverConfig,
    body: impl FnOnce(&mut Tracer<S>) -> Result<Ensemble<S>>,
) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    let set = UncertaintySet::for_dataset(config.set.clone(), dataset)?;
    let mut tracer = Tracer::new(&set);
    let e = body(&mut tracer)?;
    Ok((e, tracer.trace))
}

pub(crate) fn erm_traced<S: Scalar>(dataset: &Dataset<S>, c: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    traced(dataset, c, |tr| erm_impl(dataset, &c.learner, &c.budget, c.seed, Some(tr)))
}

pub(crate) fn adaboost_traced<S: Scalar>(dataset: &Dataset<S>, c: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    traced(dataset, c, |tr| adaboost_impl(dataset, &c.learner, c.rounds, &c.budget, c.seed, Some(tr)))
}

pub(crate) fn online_gdro_traced<S: Scalar>(dataset: &Dataset<S>, c: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    traced(dataset, c, |tr| gdro_impl(dataset, &c.learner, c.rounds, c.gdro_step, &c.budget, c.seed, Some(tr), |_| {}))
}
