//! χ² and KL balls around the empirical distribution, and their exact linear oracles.
//!
//! χ² uses `D(w‖P̂) = (1/n) Σ f(n w_i)` with `f(t) = ½(t-1)²`, i.e.
//! `(n/2)·‖w - 1/n‖²`. KL is `Σ w_i ln(n w_i)`.

use crate::scalar::Scalar;

pub fn chi2_divergence<S: Scalar>(w: &[S]) -> S {
    let n = S::of_usize(w.len());
    let half = S::of(0.5);
    w.iter().map(|&x| half * (n * x - S::one()).powi(2)).sum::<S>() / n
}

pub fn kl_divergence<S: Scalar>(w: &[S]) -> S {
    let n = S::of_usize(w.len());
    w.iter()
        .filter(|&&x| x > S::zero())
        .map(|&x| x * (n * x).ln())
        .sum()
}

fn uniform<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::one() / S::of_usize(n); n]
}

fn value<S: Scalar>(losses: &[S], w: &[S]) -> S {
    losses.iter().zip(w).map(|(&l, &x)| l * x).sum()
}

fn top_set<S: Scalar>(losses: &[S]) -> (S, Vec<usize>) {
    let max = losses.iter().copied().fold(S::neg_infinity(), S::max);
    let idx = (0..losses.len()).filter(|&i| losses[i] == max).collect();
    (max, idx)
}

/// `max_w w·ℓ` over the χ² ball of radius `rho`.
///
/// The maximiser lies in the family `w(τ) ∝ (ℓ - τ)_+`; its distance from
/// uniform grows with τ. For τ below `min ℓ` the family is affine in ℓ and the
/// boundary crossing has a closed form, otherwise τ is found by bisection.
pub(crate) fn chi2_linear_max<S: Scalar>(losses: &[S], rho: S) -> (S, Vec<S>) {
    let n = losses.len();
    let nf = S::of_usize(n);
    let mean = losses.iter().copied().sum::<S>() / nf;
    let ss: S = losses.iter().map(|&l| (l - mean).powi(2)).sum();
    if rho <= S::zero() || ss <= S::zero() {
        let w = uniform(n);
        return (value(losses, &w), w);
    }
    let r2 = S::of(2.0) * rho / nf;

    let (max, top) = top_set(losses);
    let m = S::of_usize(top.len());
    if S::one() / m - S::one() / nf <= r2 {
        let mut w = vec![S::zero(); n];
        for &i in &top {
            w[i] = S::one() / m;
        }
        return (max, w);
    }

    let family = |tau: S| -> Vec<S> {
        let mut w: Vec<S> = losses.iter().map(|&l| (l - tau).max(S::zero())).collect();
        let total: S = w.iter().copied().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    };
    let dist2 = |w: &[S]| -> S { w.iter().map(|&x| (x - S::one() / nf).powi(2)).sum() };

    let min = losses.iter().copied().fold(S::infinity(), S::min);
    let tau_affine = mean - ss.sqrt() / (nf * r2.sqrt());
    let w = if tau_affine <= min {
        family(tau_affine)
    } else {
        let (mut lo, mut hi) = (min, max);
        for _ in 0..200 {
            let mid = (lo + hi) * S::of(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if dist2(&family(mid)) <= r2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        family(lo)
    };
    (value(losses, &w), w)
}

fn tilted<S: Scalar>(losses: &[S], max: S, beta: S) -> Vec<S> {
    let mut w: Vec<S> = losses.iter().map(|&l| (beta * (l - max)).exp()).collect();
    let total: S = w.iter().copied().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// `max_w w·ℓ` over the KL ball of radius `rho`.
///
/// The dual `min_λ λ ln E exp(ℓ/λ) + λρ` is attained where the tilted
/// distribution `w ∝ exp(ℓ/λ)` has `KL = ρ`; KL grows monotonically with the
/// inverse temperature, so that point is located by bisection.
pub(crate) fn kl_linear_max<S: Scalar>(losses: &[S], rho: S) -> (S, Vec<S>) {
    let n = losses.len();
    let (max, top) = top_set(losses);
    let min = losses.iter().copied().fold(S::infinity(), S::min);
    if rho <= S::zero() || max == min {
        let w = uniform(n);
        return (value(losses, &w), w);
    }
    if (S::of_usize(n) / S::of_usize(top.len())).ln() <= rho {
        let mut w = vec![S::zero(); n];
        for &i in &top {
            w[i] = S::one() / S::of_usize(top.len());
        }
        return (max, w);
    }
    let mut hi = S::one() / (max - min);
    let mut guard = 0;
    while kl_divergence(&tilted(losses, max, hi)) <= rho && guard < 2000 {
        hi *= S::of(2.0);
        guard += 1;
    }
    let mut lo = S::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * S::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_divergence(&tilted(losses, max, mid)) <= rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = tilted(losses, max, lo);
    (value(losses, &w), w)
}
