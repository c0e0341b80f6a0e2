//! Exact weighted zero-one minimisation over axis-aligned decision stumps.

use super::Hypothesis;
use crate::data::Dataset;
use crate::scalar::Scalar;

fn best_label<S: Scalar>(mass: &[S]) -> (usize, S) {
    let mut best = 0;
    for (c, &m) in mass.iter().enumerate() {
        if m > mass[best] {
            best = c;
        }
    }
    (best, mass[best])
}

/// Scans every feature, every midpoint between consecutive distinct values and
/// the best label on each side. The constant hypothesis (both sides equal) is
/// considered first, so it wins all ties.
pub(crate) fn fit_stump<S: Scalar>(dataset: &Dataset<S>, w: &[S]) -> Hypothesis<S> {
    let classes = dataset.classes();
    let mut total = vec![S::zero(); classes];
    for (s, &wi) in dataset.samples().iter().zip(w) {
        total[s.label] += wi;
    }
    let total_mass: S = total.iter().copied().sum();
    let (label, top) = best_label(&total);
    let mut best_loss = total_mass - top;
    let mut best = Hypothesis::Stump {
        feature: 0,
        threshold: S::zero(),
        left: label,
        right: label,
    };

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut left = vec![S::zero(); classes];
    let mut right = vec![S::zero(); classes];
    for feature in 0..dataset.dim() {
        let value = |i: usize| dataset.sample(i).features[feature];
        order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap_or(std::cmp::Ordering::Equal));
        left.iter_mut().for_each(|m| *m = S::zero());
        let mut left_mass = S::zero();
        for k in 0..order.len().saturating_sub(1) {
            let i = order[k];
            let wi = w[i];
            left[dataset.sample(i).label] += wi;
            left_mass += wi;
            let (a, b) = (value(i), value(order[k + 1]));
            if !(a < b) {
                continue;
            }
            for c in 0..classes {
                right[c] = total[c] - left[c];
            }
            let (l_label, l_top) = best_label(&left);
            let (r_label, r_top) = best_label(&right);
            let loss = (left_mass - l_top) + ((total_mass - left_mass) - r_top);
            if loss < best_loss {
                best_loss = loss;
                let mut threshold = a + (b - a) * S::of(0.5);
                if threshold >= b {
                    threshold = a;
                }
                best = Hypothesis::Stump {
                    feature,
                    threshold,
                    left: l_label,
                    right: r_label,
                };
            }
        }
    }
    best
}
