//! Step-size selection for the greedy solvers.

use super::LineSearch;
use crate::error::{RaiError, Result};
use crate::scalar::Scalar;

/// Lower clamp of the Frank-Wolfe ball grid.
const MIN_STEP: f64 = 1e-6;
const GRID_POINTS: usize = 21;

/// Candidate steps for the grid modes at (1-based) round `t`.
pub fn grid<S: Scalar>(mode: &LineSearch, t: usize) -> Result<Vec<S>> {
    match *mode {
        LineSearch::BallAroundInverseT { radius_fraction } => {
            let centre = 1.0 / t.max(1) as f64;
            let r = radius_fraction * centre;
            let lo = (centre - r).max(MIN_STEP);
            let hi = (centre + r).min(1.0);
            if !(lo <= hi) {
                return Err(RaiError::Config(format!("empty line-search ball at round {t}")));
            }
            let span = hi - lo;
            Ok((0..GRID_POINTS)
                .map(|i| S::of(lo + span * i as f64 / (GRID_POINTS - 1) as f64))
                .collect())
        }
        LineSearch::UnitInterval => Ok((1..=GRID_POINTS)
            .map(|i| S::of(i as f64 / (GRID_POINTS + 1) as f64))
            .collect()),
        _ => Err(RaiError::Config(format!("{mode:?} is not a grid line search"))),
    }
}

/// Grid argmin of `objective`; the first (smallest) candidate wins ties.
pub fn line_search_alpha<S: Scalar>(
    mut objective: impl FnMut(S) -> Result<S>,
    mode: &LineSearch,
    t: usize,
) -> Result<S> {
    let mut best: Option<(S, S)> = None;
    for alpha in grid::<S>(mode, t)? {
        let value = objective(alpha)?;
        if !value.is_finite() {
            return Err(RaiError::Numeric(format!("line-search objective is {value} at alpha = {alpha}")));
        }
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((alpha, value));
        }
    }
    Ok(best.expect("grid is non-empty").0)
}

/// Root of a non-decreasing `derivative` on `[lo, hi]`, clamped to the ends
/// when the sign does not change.
pub(crate) fn monotone_root<S: Scalar>(mut derivative: impl FnMut(S) -> Result<S>, lo: S, hi: S) -> Result<S> {
    if derivative(lo)? >= S::zero() {
        return Ok(lo);
    }
    if derivative(hi)? <= S::zero() {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = a + (b - a) * S::of(0.5);
        if mid <= a || mid >= b {
            break;
        }
        if derivative(mid)? < S::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(a + (b - a) * S::of(0.5))
}
