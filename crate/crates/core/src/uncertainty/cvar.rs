//! Capped-simplex machinery for the α-CVaR set `{w ∈ Δ_n : w_i ≤ 1/(αn)}`.

use super::WeightVector;
use crate::error::{RaiError, Result};
use crate::scalar::Scalar;

/// Indices sorted by decreasing value, lowest index first among ties.
pub(crate) fn descending_order<S: Scalar>(values: &[S]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    order
}

/// Returns `w_i = min(cap, c·exp(log_scores_i))` with `c` chosen so `Σ w = 1`.
///
/// Sort, then binary-search the number `m` of capped entries: scaling so the
/// `m`-th largest score sits exactly on the cap gives total mass
/// `S_m = Σ_i min(cap, cap·exp(ls_i - ls_(m)))`, nondecreasing in `m`, and the
/// solution caps the largest `m` with `S_m <= 1`. Works in log space so that
/// tiny scores never underflow the normalisation. O(n log n).
pub(crate) fn capped_softmax<S: Scalar>(log_scores: &[S], cap: S) -> Vec<S> {
    let n = log_scores.len();
    let one = S::one();
    if cap * S::of_usize(n) <= one + S::epsilon() * S::of(4.0) {
        return vec![one / S::of_usize(n); n];
    }
    let order = descending_order(log_scores);
    let mass_if_capped_at = |m: usize| -> S {
        let pivot = log_scores[order[m - 1]];
        order
            .iter()
            .map(|&i| cap * (log_scores[i] - pivot).exp().min(one))
            .sum()
    };

    // Largest m in [1, n] with S_m <= 1; m = 0 when even one cap would overshoot.
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if mass_if_capped_at(mid) <= one {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let capped = lo;

    let tail = &order[capped..];
    let tail_max = tail.iter().map(|&i| log_scores[i]).fold(S::neg_infinity(), S::max);
    let tail_sum: S = tail.iter().map(|&i| (log_scores[i] - tail_max).exp()).sum();
    let remaining = (one - cap * S::of_usize(capped)).max(S::zero());

    let mut w = vec![S::zero(); n];
    for &i in &order[..capped] {
        w[i] = cap;
    }
    for &i in tail {
        w[i] = (remaining * (log_scores[i] - tail_max).exp() / tail_sum).min(cap);
    }
    w
}

/// Projection of positive `scores` onto the capped simplex by rescaling:
/// `w_i = min(c·scores_i, cap)` with `Σ w = 1`.
pub fn cvar_capped_projection<S: Scalar>(scores: &[S], cap: S) -> Result<WeightVector<S>> {
    let n = scores.len();
    if n == 0 {
        return Err(RaiError::InvalidArgument("empty score vector".into()));
    }
    if let Some(bad) = scores.iter().find(|s| !(**s > S::zero()) || !s.is_finite()) {
        return Err(RaiError::Domain(format!("scores must be positive and finite, got {bad}")));
    }
    if !(cap * S::of_usize(n) >= S::one() - S::of(1e-12)) {
        return Err(RaiError::Infeasible(format!(
            "cap {cap} is below 1/n; total capacity {} < 1",
            cap * S::of_usize(n)
        )));
    }
    let logs: Vec<S> = scores.iter().map(|s| s.ln()).collect();
    Ok(WeightVector::new_unchecked(capped_softmax(&logs, cap)))
}

/// Exact CVaR maximiser: fill the cap on the largest losses, remainder on the next one.
pub(crate) fn cvar_linear_max<S: Scalar>(losses: &[S], cap: S) -> (S, Vec<S>) {
    let mut w = vec![S::zero(); losses.len()];
    let mut remaining = S::one();
    for i in descending_order(losses) {
        if remaining <= S::zero() {
            break;
        }
        let take = cap.min(remaining);
        w[i] = take;
        remaining -= take;
    }
    let value = losses.iter().zip(&w).map(|(&l, &x)| l * x).sum();
    (value, w)
}
