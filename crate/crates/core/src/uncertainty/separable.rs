//! Lagrangian solver for entropic maximisation over intersections of
//! uncertainty sets that have no closed form.
//!
//! Variables `v_j` are either per-sample weights (`base_j = 1`) or group
//! masses (`base_j = |G_j|`, each group spread uniformly over its members).
//! The problem is
//!
//! ```text
//! max  Σ a_j v_j - η Σ v_j ln(v_j / base_j)
//! s.t. Σ v_j = 1,  0 <= v_j <= cap_j,
//!      KL(w‖P̂)  <= ρ_kl     (optional)
//!      χ²(w‖P̂)  <= ρ_chi2   (optional)
//! ```
//!
//! KL equals `ln n - H(w)`, so its multiplier only raises the entropy
//! temperature. The χ² multiplier adds a separable quadratic. For fixed
//! multipliers each coordinate solves `τ x + q e^x = C - μ` (with `v = e^x`),
//! a convex increasing equation handled by Newton from the right; μ is found
//! by bisection on `Σ v = 1` and each multiplier by bisection on its
//! constraint, always keeping the feasible end.

use crate::scalar::Scalar;

pub(crate) struct SeparableProblem<S> {
    pub scores: Vec<S>,
    pub base: Vec<S>,
    pub caps: Vec<S>,
    pub samples: usize,
    pub eta: S,
    pub kl_radius: Option<S>,
    pub chi2_radius: Option<S>,
}

impl<S: Scalar> SeparableProblem<S> {
    pub fn kl(&self, v: &[S]) -> S {
        let n = S::of_usize(self.samples);
        v.iter()
            .zip(&self.base)
            .filter(|(&x, _)| x > S::zero())
            .map(|(&x, &b)| x * (n * x / b).ln())
            .sum()
    }

    pub fn chi2(&self, v: &[S]) -> S {
        let n = S::of_usize(self.samples);
        let half = S::of(0.5);
        v.iter()
            .zip(&self.base)
            .map(|(&x, &b)| (x - b / n).powi(2) / b)
            .sum::<S>()
            * half
            * n
    }

    pub fn solve(&self) -> Vec<S> {
        let Some(rho) = self.kl_radius else {
            return self.solve_chi2(self.eta);
        };
        outer_bisection(
            |lambda| self.solve_chi2(self.eta + lambda),
            |v| self.kl(v),
            rho,
        )
    }

    fn solve_chi2(&self, tau: S) -> Vec<S> {
        let Some(rho) = self.chi2_radius else {
            return self.inner(tau, S::zero());
        };
        outer_bisection(|lambda| self.inner(tau, lambda), |v| self.chi2(v), rho)
    }

    /// Maximiser for fixed temperature `tau` and χ² multiplier `lambda`.
    fn inner(&self, tau: S, lambda: S) -> Vec<S> {
        let m = self.scores.len();
        let one = S::one();
        let cap_total: S = self.caps.iter().copied().sum();
        if cap_total <= one + S::epsilon() * S::of(8.0) {
            let mut v = self.caps.clone();
            crate::scalar::renormalize(&mut v);
            return v;
        }
        let n = S::of_usize(self.samples);
        let quad: Vec<S> = self.base.iter().map(|&b| lambda * n / b).collect();
        let constant: Vec<S> = (0..m)
            .map(|j| {
                let b = self.base[j];
                self.scores[j] - tau + tau * b.ln() + quad[j] * (b / n)
            })
            .collect();

        let unconstrained = lambda == S::zero() && self.caps.iter().all(|c| c.is_infinite());
        if unconstrained {
            let logs: Vec<S> = constant.iter().map(|&c| c / tau).collect();
            let lse = crate::scalar::log_sum_exp(logs.iter().copied());
            let mut v: Vec<S> = logs.iter().map(|&l| (l - lse).exp()).collect();
            crate::scalar::renormalize(&mut v);
            return v;
        }

        let coords = |mu: S| -> Vec<S> {
            (0..m)
                .map(|j| solve_coordinate(tau, quad[j], constant[j] - mu).min(self.caps[j]))
                .collect()
        };
        let total = |v: &[S]| v.iter().copied().sum::<S>();

        let start = constant.iter().copied().fold(S::neg_infinity(), S::max);
        let mut step = one.max(tau);
        let mut hi = start;
        let mut guard = 0;
        while total(&coords(hi)) > one && guard < 2000 {
            guard += 1;
            hi += step;
            step *= S::of(2.0);
        }
        step = one.max(tau);
        let mut lo = start;
        guard = 0;
        while total(&coords(lo)) < one && guard < 2000 {
            guard += 1;
            lo -= step;
            step *= S::of(2.0);
        }
        let mut v = coords(hi);
        for _ in 0..400 {
            let gap = (total(&v) - one).abs();
            if gap <= S::epsilon() * S::of(16.0) {
                break;
            }
            let mid = (lo + hi) * S::of(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            let cand = coords(mid);
            if total(&cand) > one {
                lo = mid;
            } else {
                hi = mid;
                v = cand;
            }
        }
        crate::scalar::renormalize(&mut v);
        v
    }
}

/// Root of `tau·x + quad·e^x = c`, returned as `e^x`.
fn solve_coordinate<S: Scalar>(tau: S, quad: S, c: S) -> S {
    if quad == S::zero() {
        return (c / tau).exp();
    }
    // Start right of the root: f(x0) >= 0 for both candidates, and Newton on a
    // convex increasing function then decreases monotonically to the root.
    let mut x = (c / tau).min((c.abs() / quad + S::one()).ln());
    for _ in 0..100 {
        let e = x.exp();
        let f = tau * x + quad * e - c;
        let step = f / (tau + quad * e);
        x -= step;
        if step.abs() <= S::epsilon() * S::of(4.0) * x.abs().max(S::one()) {
            break;
        }
    }
    x.exp()
}

/// Finds the smallest multiplier whose solution meets `constraint(v) <= radius`
/// (the constraint is nonincreasing in the multiplier) and returns that solution.
fn outer_bisection<S: Scalar>(
    solve: impl Fn(S) -> Vec<S>,
    constraint: impl Fn(&[S]) -> S,
    radius: S,
) -> Vec<S> {
    let free = solve(S::zero());
    if constraint(&free) <= radius {
        return free;
    }
    let mut hi = S::one();
    let mut v_hi = solve(hi);
    let mut guard = 0;
    while constraint(&v_hi) > radius && guard < 200 {
        hi *= S::of(4.0);
        v_hi = solve(hi);
        guard += 1;
    }
    let mut lo = S::zero();
    let tol = S::of(1e-11) * radius.max(S::of(1e-3));
    for _ in 0..200 {
        if radius - constraint(&v_hi) <= tol {
            break;
        }
        let mid = (lo + hi) * S::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let cand = solve(mid);
        if constraint(&cand) <= radius {
            hi = mid;
            v_hi = cand;
        } else {
            lo = mid;
        }
    }
    v_hi
}
