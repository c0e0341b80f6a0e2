//! Ensemble learning for min-max sample-reweighting games.
//!
//! An adversary picks sample weights from an uncertainty set (CVaR, χ²/KL
//! balls, group mixtures, or their intersections); a learner responds with a
//! weak hypothesis that is appended to a randomized ensemble. The [`solvers`]
//! module provides the game-play (FTRL vs best response) and greedy
//! (Frank-Wolfe, generalised AdaBoost) loops, [`ensemble`] the risk metrics.
//!
//! Numeric code is generic over [`Scalar`]; the `*64` / `*32` aliases below
//! fix the precision.

pub mod data;
pub mod ensemble;
pub mod error;
pub mod learners;
pub mod rng;
pub mod scalar;
pub mod solvers;
pub mod uncertainty;

pub use error::{RaiError, Result};
pub use scalar::Scalar;
pub use uncertainty::{RegularizerSpec, UncertaintySet, UncertaintySetSpec};

pub type Dataset64 = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type Sample64 = data::Sample<f64>;
pub type WeightVector64 = uncertainty::WeightVector<f64>;
pub type WeightVector32 = uncertainty::WeightVector<f32>;
pub type Hypothesis64 = learners::Hypothesis<f64>;
pub type Hypothesis32 = learners::Hypothesis<f32>;
pub type Ensemble64 = ensemble::Ensemble<f64>;
pub type Ensemble32 = ensemble::Ensemble<f32>;
pub type SolverTrace64 = solvers::SolverTrace<f64>;
pub type SolverTrace32 = solvers::SolverTrace<f32>;
