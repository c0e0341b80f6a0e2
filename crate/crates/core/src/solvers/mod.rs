//! Solvers for the min-max game `min_Q max_{w ∈ W} E_{h~Q} E_w ℓ`.
//!
//! * game play — FTRL over sample weights against a best-responding learner;
//!   the result is the uniform mixture of all responses;
//! * Frank-Wolfe — `Q ← (1-α)Q + αG` along the gradient of the
//!   entropy-smoothed objective `L_η`;
//! * generalised AdaBoost — the unnormalized step `Q ← Q + αG` on the relaxed
//!   simplex with multiplier `λ = -1/2`;
//! * baselines: ERM, classic AdaBoost and online group DRO.

mod baselines;
mod engine;
pub mod line_search;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use baselines::{adaboost_classic, erm, online_gdro, online_gdro_with_weights};
pub use engine::{solve_matrix_game, SolverState};
pub use line_search::line_search_alpha;

use crate::data::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{RaiError, Result};
use crate::learners::{LearnerKind, TrainBudget};
use crate::scalar::{dot, Scalar};
use crate::uncertainty::{RegularizerSpec, UncertaintySet, UncertaintySetSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "game_play")]
    GamePlay,
    #[serde(rename = "frank_wolfe")]
    FrankWolfe,
    #[serde(rename = "gen_adaboost")]
    GenAdaBoost,
    #[serde(rename = "erm")]
    Erm,
    #[serde(rename = "adaboost")]
    AdaBoost,
    #[serde(rename = "online_gdro")]
    OnlineGdro,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GamePlay => "game_play",
            Algorithm::FrankWolfe => "frank_wolfe",
            Algorithm::GenAdaBoost => "gen_adaboost",
            Algorithm::Erm => "erm",
            Algorithm::AdaBoost => "adaboost",
            Algorithm::OnlineGdro => "online_gdro",
        }
    }

    fn is_game(self) -> bool {
        matches!(self, Algorithm::GamePlay | Algorithm::FrankWolfe | Algorithm::GenAdaBoost)
    }
}

/// Regularisation strength per round of game play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSchedule {
    #[default]
    Constant,
    /// `η · (t - 1)` at round `t` (`η` in round 1): the multiplier under which
    /// game play and Frank-Wolfe with `α^t = 1/t` produce the same weights.
    LinearInRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LineSearch {
    /// Frank-Wolfe: `α^t = 2/(t+1)`; generalised AdaBoost: `α^t = 1`.
    #[default]
    None,
    /// `α^t = 1/t` (Frank-Wolfe only): the ensemble stays the uniform mixture.
    InverseRound,
    /// 21-point grid on `[1/t - r, 1/t + r] ∩ (0, 1]`, `r = radius_fraction / t`.
    BallAroundInverseT { radius_fraction: f64 },
    /// 21-point grid `i/22`, `i = 1..=21`.
    UnitInterval,
    /// Minimises the smoothed objective along the step direction by bisection
    /// on its derivative.
    Exact,
}

fn default_eta() -> f64 {
    1.0
}
fn default_growth() -> f64 {
    2.0
}
fn default_validation() -> f64 {
    0.1
}
fn default_gdro_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub set: UncertaintySetSpec,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Factor applied to η whenever the validation objective increases.
    #[serde(default = "default_growth")]
    pub eta_growth: f64,
    pub rounds: usize,
    #[serde(default)]
    pub eta_schedule: EtaSchedule,
    pub learner: LearnerKind,
    #[serde(default)]
    pub budget: TrainBudget,
    #[serde(default)]
    pub line_search: LineSearch,
    #[serde(default)]
    pub seed: u64,
    /// Fraction of the training data held out to drive η adaptation (0 disables).
    #[serde(default = "default_validation")]
    pub validation_fraction: f64,
    /// Leading rounds whose hypothesis is trained on uniform weights.
    #[serde(default)]
    pub warmup_rounds: usize,
    #[serde(default = "default_gdro_step")]
    pub gdro_step: f64,
    /// Keep every round's sample weights in the trace.
    #[serde(default)]
    pub record_weights: bool,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, set: UncertaintySetSpec, rounds: usize, learner: LearnerKind) -> Self {
        SolverConfig {
            algorithm,
            set,
            eta: default_eta(),
            eta_growth: default_growth(),
            rounds,
            eta_schedule: EtaSchedule::Constant,
            learner,
            budget: TrainBudget::default(),
            line_search: LineSearch::None,
            seed: 0,
            validation_fraction: default_validation(),
            warmup_rounds: 0,
            gdro_step: default_gdro_step(),
            record_weights: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SolverConfig = serde_json::from_str(text).map_err(|e| RaiError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RaiError::Config(m));
        if self.rounds == 0 {
            return bad("rounds must be >= 1".into());
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.eta_growth >= 1.0 && self.eta_growth.is_finite()) {
            return bad(format!("eta_growth must be >= 1, got {}", self.eta_growth));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!("validation_fraction must lie in [0, 1), got {}", self.validation_fraction));
        }
        if !(self.gdro_step > 0.0 && self.gdro_step.is_finite()) {
            return bad(format!("gdro_step must be positive, got {}", self.gdro_step));
        }
        match (self.algorithm, self.line_search) {
            (_, LineSearch::BallAroundInverseT { radius_fraction }) if !(radius_fraction > 0.0 && radius_fraction < 1.0) => {
                return bad(format!("radius_fraction must lie in (0, 1), got {radius_fraction}"));
            }
            (Algorithm::GenAdaBoost, LineSearch::InverseRound | LineSearch::BallAroundInverseT { .. }) => {
                return bad("generalised AdaBoost supports line_search none, unit_interval or exact".into());
            }
            _ => {}
        }
        self.budget.validate()?;
        self.set.validate()
    }
}

/// One completed round.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<S> {
    pub round: usize,
    /// Un-regularised objective `max_w E_Q E_w ℓ` on the training data.
    pub train_obj: S,
    pub val_obj: Option<S>,
    pub alpha: S,
    /// Regularisation strength used for this round's weights.
    pub eta: f64,
    /// Duality gap against a finite hypothesis pool, when one is supplied.
    pub ne_gap: Option<S>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace<S> {
    pub records: Vec<TraceRecord<S>>,
    /// Per-round sample weights, filled when `record_weights` is set.
    pub weights: Vec<Vec<S>>,
}

impl<S: Scalar> SolverTrace<S> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord<S>> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let opt = |v: Option<S>| v.map(|x| format!("{:.17e}", x.as_f64())).unwrap_or_default();
        writeln!(out, "round,train_obj,val_obj,alpha,eta,ne_gap")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:.17e},{},{:.17e},{:.17e},{}",
                r.round,
                r.train_obj.as_f64(),
                opt(r.val_obj),
                r.alpha.as_f64(),
                r.eta,
                opt(r.ne_gap)
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }
}

/// `L_η(Q) = max_{w ∈ W} E_Q E_w ℓ + η·Reg(w)`.
pub fn smoothed_objective<S: Scalar>(ensemble: &Ensemble<S>, dataset: &Dataset<S>, set: &UncertaintySet, eta: f64) -> Result<S> {
    smoothed_value(set, &ensemble.mean_loss(dataset)?, eta)
}

pub(crate) fn smoothed_value<S: Scalar>(set: &UncertaintySet, losses: &[S], eta: f64) -> Result<S> {
    let w = set.regularized_argmax(losses, &RegularizerSpec::entropy(eta))?;
    Ok(dot(losses, w.as_slice()) + S::of(eta) * set.regularizer_value(w.as_slice()))
}

/// Next η: multiplied by `growth` when the validation objective went up.
pub fn eta_adapt<S: Scalar>(previous: S, current: S, eta: f64, growth: f64) -> f64 {
    if current > previous {
        eta * growth
    } else {
        eta
    }
}

/// Runs the algorithm selected by `config` on `dataset`.
pub fn solve<S: Scalar>(dataset: &Dataset<S>, config: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    config.validate()?;
    if config.set.needs_groups() && !dataset.is_grouped() {
        return Err(RaiError::Config(format!("set {:?} needs group ids but the data is ungrouped", config.set)));
    }
    match config.algorithm {
        a if a.is_game() => engine::solve_dataset(dataset, config),
        Algorithm::Erm => baselines::erm_traced(dataset, config),
        Algorithm::AdaBoost => baselines::adaboost_traced(dataset, config),
        Algorithm::OnlineGdro => baselines::online_gdro_traced(dataset, config),
        _ => unreachable!(),
    }
}

fn expect(config: &SolverConfig, algorithm: Algorithm) -> Result<()> {
    if config.algorithm != algorithm {
        return Err(RaiError::Config(format!(
            "config selects {} but {} was called",
            config.algorithm.name(),
            algorithm.name()
        )));
    }
    Ok(())
}

/// Game play: FTRL weights against best responses; returns `Unif{h^1..h^T}`.
pub fn game_play_solve<S: Scalar>(dataset: &Dataset<S>, config: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    expect(config, Algorithm::GamePlay)?;
    solve(dataset, config)
}

pub fn fw_solve<S: Scalar>(dataset: &Dataset<S>, config: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    expect(config, Algorithm::FrankWolfe)?;
    solve(dataset, config)
}

pub fn gen_adaboost_solve<S: Scalar>(dataset: &Dataset<S>, config: &SolverConfig) -> Result<(Ensemble<S>, SolverTrace<S>)> {
    expect(config, Algorithm::GenAdaBoost)?;
    solve(dataset, config)
}
