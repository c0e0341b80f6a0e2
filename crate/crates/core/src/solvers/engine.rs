//! The shared round loop of game play, Frank-Wolfe and generalised AdaBoost.
//!
//! The ensemble is stored as unnormalized masses `c_k` together with the
//! cumulative loss `C_i = Σ_k c_k ℓ_k(i)` and total mass `M = Σ_k c_k`. Every
//! gradient is then one regularised-argmax call on `C`: for the normalized
//! mixture `argmax_w w·C/M + ηH(w) = argmax_w w·C + ηM·H(w)`. With unit masses
//! this is literally the call game play makes, which keeps the two algorithms'
//! weights bit-identical when `α^t = 1/t`.

use super::line_search::{line_search_alpha, monotone_root};
use super::{eta_adapt, Algorithm, EtaSchedule, LineSearch, SolverConfig, SolverTrace, TraceRecord};
use crate::data::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{RaiError, Result};
use crate::learners::{best_response, loss_row, pool_argmin, Hypothesis, LearnerKind};
use crate::rng::SplitMix64;
use crate::scalar::{dot, Scalar};
use crate::uncertainty::{RegularizerSpec, UncertaintySet, WeightVector};

/// Masses are rescaled once their total exceeds this.
const RESCALE_ABOVE: f64 = 1e100;

/// Solver state between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<S> {
    /// `Σ_k c_k ℓ_k(i)` on the training samples.
    pub cum_losses: Vec<S>,
    /// Unnormalized member masses `c_k`.
    pub masses: Vec<S>,
    pub round: usize,
    total: S,
    val_cum: Option<Vec<S>>,
}

impl<S: Scalar> SolverState<S> {
    fn new(n: usize, n_val: Option<usize>) -> Self {
        SolverState {
            cum_losses: vec![S::zero(); n],
            masses: Vec::new(),
            round: 0,
            total: S::zero(),
            val_cum: n_val.map(|m| vec![S::zero(); m]),
        }
    }

    fn mean(cum: &[S], total: S) -> Vec<S> {
        cum.iter().map(|&c| c / total).collect()
    }

    /// Adds a member of mass `beta` (`reset` drops all previous mass first).
    fn add(&mut self, beta: S, row: &[S], val_row: Option<&[S]>, reset: bool) {
        if reset {
            self.masses.iter_mut().for_each(|m| *m = S::zero());
            self.cum_losses.iter_mut().for_each(|c| *c = S::zero());
            if let Some(v) = self.val_cum.as_mut() {
                v.iter_mut().for_each(|c| *c = S::zero());
            }
            self.total = S::zero();
        }
        self.masses.push(beta);
        self.total += beta;
        for (c, &l) in self.cum_losses.iter_mut().zip(row) {
            *c += beta * l;
        }
        if let (Some(v), Some(r)) = (self.val_cum.as_mut(), val_row) {
            for (c, &l) in v.iter_mut().zip(r) {
                *c += beta * l;
            }
        }
        if self.total > S::of(RESCALE_ABOVE) {
            let t = self.total;
            self.masses.iter_mut().for_each(|m| *m /= t);
            self.cum_losses.iter_mut().for_each(|c| *c /= t);
            if let Some(v) = self.val_cum.as_mut() {
                v.iter_mut().for_each(|c| *c /= t);
            }
            self.total = S::one();
        }
    }
}

/// Best-response provider for the round loop.
pub(crate) trait Responder<S: Scalar> {
    type Member: Clone;
    fn respond(&mut self, round: usize, w: &[S]) -> Result<Self::Member>;
    fn train_row(&self, m: &Self::Member) -> Result<Vec<S>>;
    fn val_row(&self, m: &Self::Member) -> Result<Option<Vec<S>>>;
    /// Loss rows of a finite hypothesis class, enabling the duality-gap diagnostic.
    fn pool_rows(&self) -> Option<&[Vec<S>]>;
}

struct DatasetResponder<'a, S> {
    train: &'a Dataset<S>,
    val: Option<&'a Dataset<S>>,
    learner: &'a LearnerKind,
    config: &'a SolverConfig,
}

impl<S: Scalar> Responder<S> for DatasetResponder<'_, S> {
    type Member = Hypothesis<S>;

    fn respond(&mut self, round: usize, w: &[S]) -> Result<Hypothesis<S>> {
        let mut budget = self.config.budget;
        budget.seed = SplitMix64::derive(self.config.seed ^ budget.seed, round as u64).next_u64();
        best_response(self.train, w, self.learner, &budget)
    }

    fn train_row(&self, m: &Hypothesis<S>) -> Result<Vec<S>> {
        loss_row(m, self.train)
    }

    fn val_row(&self, m: &Hypothesis<S>) -> Result<Option<Vec<S>>> {
        self.val.map(|v| loss_row(m, v)).transpose()
    }

    fn pool_rows(&self) -> Option<&[Vec<S>]> {
        None
    }
}

/// Best response over a fixed set of loss rows; members are row indices.
struct PoolResponder<S> {
    rows: Vec<Vec<S>>,
    val_rows: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> Responder<S> for PoolResponder<S> {
    type Member = usize;

    fn respond(&mut self, _round: usize, w: &[S]) -> Result<usize> {
        Ok(pool_argmin(&self.rows, w))
    }

    fn train_row(&self, m: &usize) -> Result<Vec<S>> {
        Ok(self.rows[*m].clone())
    }

    fn val_row(&self, m: &usize) -> Result<Option<Vec<S>>> {
        Ok(self.val_rows.as_ref().map(|r| r[*m].clone()))
    }

    fn pool_rows(&self) -> Option<&[Vec<S>]> {
        Some(&self.rows)
    }
}

fn reg(eta: f64) -> RegularizerSpec {
    RegularizerSpec::entropy(eta)
}

fn check_finite<S: Scalar>(what: &str, v: S) -> Result<S> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RaiError::Numeric(format!("{what} is {v}")))
    }
}

/// The round loop. Returns the members with their final (unnormalized) masses.
fn run<S: Scalar, R: Responder<S>>(
    responder: &mut R,
    set: &UncertaintySet,
    val_set: Option<&UncertaintySet>,
    config: &SolverConfig,
) -> Result<(Vec<(R::Member, S)>, SolverTrace<S>)> {
    let n = set.len();
    let mut state: SolverState<S> = SolverState::new(n, val_set.map(|v| v.len()));
    let mut members: Vec<R::Member> = Vec::new();
    let mut trace = SolverTrace { records: Vec::new(), weights: Vec::new() };
    let mut eta = config.eta;
    let mut prev_val: Option<S> = None;
    let mut w_sum = vec![S::zero(); n];
    let half = S::of(0.5);

    for t in 1..=config.rounds {
        state.round = t;
        // Strength handed to the regularised oracle, and the η reported for the round.
        let (strength, round_eta) = match config.algorithm {
            Algorithm::GamePlay => {
                let k = match config.eta_schedule {
                    EtaSchedule::Constant => 1.0,
                    EtaSchedule::LinearInRound => (t - 1).max(1) as f64,
                };
                (eta * k, eta * k)
            }
            Algorithm::FrankWolfe => {
                let m = state.total.as_f64();
                (if m > 0.0 { eta * m } else { eta }, eta)
            }
            _ => (eta, eta),
        };
        let w = if t <= config.warmup_rounds {
            WeightVector::uniform(n)
        } else {
            set.regularized_argmax(&state.cum_losses, &reg(strength))?
        };
        let w = w.into_inner();
        for (a, &b) in w_sum.iter_mut().zip(&w) {
            *a += b;
        }

        let member = responder.respond(t, &w)?;
        let row = responder.train_row(&member)?;
        let val_row = responder.val_row(&member)?;
        if config.record_weights {
            trace.weights.push(w);
        }

        let empty = state.total <= S::zero();
        let (alpha, beta, reset) = match config.algorithm {
            Algorithm::GamePlay => (S::one() / S::of_usize(t), S::one(), false),
            Algorithm::FrankWolfe => {
                let alpha = if empty {
                    S::one()
                } else {
                    match config.line_search {
                        LineSearch::None => S::of(2.0) / S::of_usize(t + 1),
                        LineSearch::InverseRound => S::one() / S::of_usize(t),
                        LineSearch::Exact => fw_exact(set, &state, &row, eta)?,
                        grid => {
                            let mean = SolverState::mean(&state.cum_losses, state.total);
                            line_search_alpha(
                                |a| {
                                    let mixed: Vec<S> =
                                        mean.iter().zip(&row).map(|(&m, &l)| (S::one() - a) * m + a * l).collect();
                                    Ok(set.linear_max(&mixed)?.0)
                                },
                                &grid,
                                t,
                            )?
                        }
                    }
                };
                if matches!(config.line_search, LineSearch::InverseRound) && !empty {
                    (alpha, S::one(), false)
                } else if alpha >= S::one() || empty {
                    (S::one(), S::one(), true)
                } else {
                    (alpha, alpha * state.total / (S::one() - alpha), false)
                }
            }
            Algorithm::GenAdaBoost => {
                let alpha = match config.line_search {
                    LineSearch::None => S::one(),
                    LineSearch::Exact => {
                        let cap = S::of(2.0 * eta * 1e9f64.ln());
                        monotone_root(
                            |a| {
                                let shifted: Vec<S> =
                                    state.cum_losses.iter().zip(&row).map(|(&c, &l)| c + a * l).collect();
                                let wa = set.regularized_argmax(&shifted, &reg(eta))?;
                                Ok(dot(wa.as_slice(), &row) - half)
                            },
                            S::zero(),
                            cap,
                        )?
                    }
                    grid => line_search_alpha(
                        |a| {
                            let mixed: Vec<S> = state
                                .cum_losses
                                .iter()
                                .zip(&row)
                                .map(|(&c, &l)| (c + a * l) / (state.total + a))
                                .collect();
                            Ok(set.linear_max(&mixed)?.0)
                        },
                        &grid,
                        t,
                    )?,
                };
                (alpha, alpha, false)
            }
            _ => unreachable!("baselines do not use the round loop"),
        };
        state.add(beta, &row, val_row.as_deref(), reset);
        members.push(member);

        let train_obj = if state.total > S::zero() {
            set.linear_max(&SolverState::mean(&state.cum_losses, state.total))?.0
        } else {
            set.linear_max(&row)?.0
        };
        check_finite("training objective", train_obj)?;
        let val_obj = match (val_set, &state.val_cum) {
            (Some(vs), Some(vc)) if state.total > S::zero() => {
                Some(check_finite("validation objective", vs.linear_max(&SolverState::mean(vc, state.total))?.0)?)
            }
            _ => None,
        };
        let ne_gap = responder.pool_rows().map(|rows| {
            let avg: Vec<S> = w_sum.iter().map(|&x| x / S::of_usize(t)).collect();
            let best = rows.iter().map(|r| dot(r, &avg)).fold(S::infinity(), S::min);
            train_obj - best
        });
        trace.records.push(TraceRecord { round: t, train_obj, val_obj, alpha, eta: round_eta, ne_gap });

        if let Some(v) = val_obj {
            if let Some(p) = prev_val {
                eta = eta_adapt(p, v, eta, config.eta_growth);
            }
            prev_val = Some(v);
        }
    }
    Ok((members.into_iter().zip(state.masses).collect(), trace))
}

/// Frank-Wolfe step minimising `L_η((1-α)Q + αG)` over `α ∈ [0, 1]`.
fn fw_exact<S: Scalar>(set: &UncertaintySet, state: &SolverState<S>, row: &[S], eta: f64) -> Result<S> {
    let mean = SolverState::mean(&state.cum_losses, state.total);
    let direction: Vec<S> = row.iter().zip(&mean).map(|(&l, &m)| l - m).collect();
    monotone_root(
        |a| {
            let mixed: Vec<S> = mean.iter().zip(&direction).map(|(&m, &d)| m + a * d).collect();
            let w = set.regularized_argmax(&mixed, &reg(eta))?;
            Ok(dot(w.as_slice(), &direction))
        },
        S::zero(),
        S::one(),
    )
}

pub(crate) fn split_validation<S: Scalar>(dataset: &Dataset<S>, config: &SolverConfig) -> Result<(Dataset<S>, Option<Dataset<S>>)> {
    if config.validation_fraction <= 0.0 {
        return Ok((dataset.clone(), None));
    }
    let seed = SplitMix64::derive(config.seed, 0x7661_6c69).next_u64();
    let (val, train) = dataset.train_test_split(config.validation_fraction, seed)?;
    Ok((train, Some(val)))
}

pub(crate) fn solve_dataset<S: Scalar>(dataset: &Dataset<S>, config: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    let (train, val) = split_validation(dataset, config)?;
    let set = UncertaintySet::for_dataset(config.set.clone(), &train)?;
    let val_set = val.as_ref().map(|v| UncertaintySet::for_dataset(config.set.clone(), v)).transpose()?;

    let members = if let LearnerKind::Pool { hypotheses } = &config.learner {
        if hypotheses.is_empty() {
            return Err(RaiError::Config("hypothesis pool is empty".into()));
        }
        let pool: Vec<Hypothesis<S>> = hypotheses.iter().map(|h| h.cast()).collect();
        let rows = pool.iter().map(|h| loss_row(h, &train)).collect::<Result<Vec<_>>>()?;
        let val_rows = val
            .as_ref()
            .map(|v| pool.iter().map(|h| loss_row(h, v)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let mut responder = PoolResponder { rows, val_rows };
        let (members, trace) = run(&mut responder, &set, val_set.as_ref(), config)?;
        let members = members.into_iter().map(|(k, m)| (pool[k].clone(), m)).collect::<Vec<_>>();
        (members, trace)
    } else {
        let mut responder = DatasetResponder { train: &train, val: val.as_ref(), learner: &config.learner, config };
        run(&mut responder, &set, val_set.as_ref(), config)?
    };
    let (members, trace) = members;
    let mut ensemble = Ensemble::new();
    for (h, m) in members {
        ensemble.push(h, m)?;
    }
    Ok((ensemble.normalized(), trace))
}

/// Plays the game on an explicit loss matrix (`losses[k][i]` = loss of
/// hypothesis `k` on sample `i`) with best responses restricted to its rows.
/// Returns the normalized mass of every row and the trace, whose `ne_gap`
/// column is always filled. No validation split is made.
pub fn solve_matrix_game<S: Scalar>(
    losses: &[Vec<S>],
    set: &UncertaintySet,
    config: &SolverConfig,
) -> Result<(Vec<S>, SolverTrace<S>)> {
    config.validate()?;
    if !config.algorithm.is_game() {
        return Err(RaiError::Config(format!("{} is not a game solver", config.algorithm.name())));
    }
    if losses.is_empty() {
        return Err(RaiError::Config("loss matrix has no rows".into()));
    }
    for r in losses {
        if r.len() != set.len() {
            return Err(RaiError::DimensionMismatch { expected: set.len(), got: r.len() });
        }
    }
    let mut responder = PoolResponder { rows: losses.to_vec(), val_rows: None };
    let (members, trace) = run(&mut responder, set, None, config)?;
    let mut masses = vec![S::zero(); losses.len()];
    for (k, m) in members {
        masses[k] += m;
    }
    let total: S = masses.iter().copied().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    Ok((masses, trace))
}
