//! Adversary side of the game: uncertainty sets over sample weights, the
//! entropy-regularised best response (FTRL step), exact linear maximisation
//! for risk evaluation, and feasibility checks.
//!
//! Sign convention: the regularised oracle maximises `Σ w_i L_i + η H(w)`, so
//! weights *increase* with cumulative loss.

pub mod cvar;
pub mod divergence;
mod separable;

use serde::{Deserialize, Serialize};

pub use cvar::cvar_capped_projection;
pub use divergence::{chi2_divergence, kl_divergence};

use crate::data::Dataset;
use crate::error::{RaiError, Result};
use crate::scalar::{entropy, Scalar};
use separable::SeparableProblem;

/// Declarative description of the adversary's feasible weights `W_n ⊆ Δ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UncertaintySetSpec {
    /// The singleton `{P̂_data}`.
    Erm,
    /// The whole simplex.
    Simplex,
    Kl { rho: f64 },
    Cvar { alpha: f64 },
    Chi2 { rho: f64 },
    /// Mixtures of the group-uniform distributions.
    Group,
    Intersection { members: Vec<UncertaintySetSpec> },
}

impl UncertaintySetSpec {
    fn tag(&self) -> &'static str {
        match self {
            UncertaintySetSpec::Erm => "erm",
            UncertaintySetSpec::Simplex => "simplex",
            UncertaintySetSpec::Kl { .. } => "kl",
            UncertaintySetSpec::Cvar { .. } => "cvar",
            UncertaintySetSpec::Chi2 { .. } => "chi2",
            UncertaintySetSpec::Group => "group",
            UncertaintySetSpec::Intersection { .. } => "intersection",
        }
    }

    pub fn needs_groups(&self) -> bool {
        match self {
            UncertaintySetSpec::Group => true,
            UncertaintySetSpec::Intersection { members } => members.iter().any(|m| m.needs_groups()),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RaiError::InvalidSpec(m));
        match self {
            UncertaintySetSpec::Kl { rho } | UncertaintySetSpec::Chi2 { rho } => {
                if !(rho.is_finite() && *rho >= 0.0) {
                    return bad(format!("{} radius must be finite and >= 0, got {rho}", self.tag()));
                }
            }
            UncertaintySetSpec::Cvar { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("cvar alpha must lie in (0, 1], got {alpha}"));
                }
            }
            UncertaintySetSpec::Intersection { members } => {
                if members.len() < 2 {
                    return bad("intersection needs at least two members".into());
                }
                let mut tags: Vec<&str> = Vec::new();
                for m in members {
                    if matches!(m, UncertaintySetSpec::Intersection { .. }) {
                        return bad("nested intersections are not supported".into());
                    }
                    m.validate()?;
                    if tags.contains(&m.tag()) {
                        return bad(format!("intersection repeats kind '{}'", m.tag()));
                    }
                    tags.push(m.tag());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    NegEntropy,
}

/// `Reg(w) = -Σ w log w` scaled by `strength` (η).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub strength: f64,
}

impl RegularizerSpec {
    pub fn entropy(strength: f64) -> Self {
        RegularizerSpec {
            kind: RegularizerKind::NegEntropy,
            strength,
        }
    }
}

/// A probability vector over the training samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<S>(Vec<S>);

impl<S: Scalar> WeightVector<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(RaiError::InvalidArgument("empty weight vector".into()));
        }
        if weights.iter().any(|w| !(*w >= S::zero()) || !w.is_finite()) {
            return Err(RaiError::Domain("weights must be finite and nonnegative".into()));
        }
        let total: S = weights.iter().copied().sum();
        if (total - S::one()).abs() > S::of(1e-9).max(S::epsilon() * S::of(64.0)) {
            return Err(RaiError::Domain(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightVector(weights))
    }

    pub(crate) fn new_unchecked(weights: Vec<S>) -> Self {
        WeightVector(weights)
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector(vec![S::one() / S::of_usize(n); n])
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Compact group structure: only groups with at least one member take part.
#[derive(Debug, Clone, PartialEq)]
struct GroupIndex {
    of_sample: Vec<usize>,
    sizes: Vec<usize>,
}

impl GroupIndex {
    fn new(ids: &[usize]) -> Self {
        let mut remap: Vec<Option<usize>> = Vec::new();
        let mut sizes = Vec::new();
        let mut of_sample = Vec::with_capacity(ids.len());
        let mut present: Vec<usize> = ids.to_vec();
        present.sort_unstable();
        present.dedup();
        for &g in &present {
            if remap.len() <= g {
                remap.resize(g + 1, None);
            }
            remap[g] = Some(sizes.len());
            sizes.push(0);
        }
        for &g in ids {
            let k = remap[g].expect("group id was registered");
            sizes[k] += 1;
            of_sample.push(k);
        }
        GroupIndex { of_sample, sizes }
    }

    fn count(&self) -> usize {
        self.sizes.len()
    }

    fn means<S: Scalar>(&self, values: &[S]) -> Vec<S> {
        let mut sums = vec![S::zero(); self.count()];
        for (&k, &v) in self.of_sample.iter().zip(values) {
            sums[k] += v;
        }
        sums.iter()
            .zip(&self.sizes)
            .map(|(&s, &c)| s / S::of_usize(c))
            .collect()
    }

    fn spread<S: Scalar>(&self, masses: &[S]) -> Vec<S> {
        self.of_sample
            .iter()
            .map(|&k| masses[k] / S::of_usize(self.sizes[k]))
            .collect()
    }
}

/// One violated constraint; `amount` is how far outside the set `w` lies.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

pub const MEMBERSHIP_TOLERANCE: f64 = 1e-8;

/// An uncertainty set bound to a concrete ground set of `n` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySet {
    spec: UncertaintySetSpec,
    n: usize,
    groups: Option<GroupIndex>,
}

impl UncertaintySet {
    pub fn new(spec: UncertaintySetSpec, n: usize, group_ids: Option<&[usize]>) -> Result<Self> {
        spec.validate()?;
        if n == 0 {
            return Err(RaiError::InvalidArgument("uncertainty set over zero samples".into()));
        }
        let groups = match group_ids {
            Some(ids) if ids.len() != n => {
                return Err(RaiError::DimensionMismatch { expected: n, got: ids.len() })
            }
            Some(ids) => Some(GroupIndex::new(ids)),
            None => None,
        };
        if spec.needs_groups() && groups.is_none() {
            return Err(RaiError::InvalidSpec("group uncertainty set requires grouped data".into()));
        }
        Ok(UncertaintySet { spec, n, groups })
    }

    pub fn for_dataset<S: Scalar>(spec: UncertaintySetSpec, dataset: &Dataset<S>) -> Result<Self> {
        let ids = dataset.group_ids();
        let ids = if spec.needs_groups() { ids } else { None };
        UncertaintySet::new(spec, dataset.len(), ids.as_deref())
    }

    pub fn spec(&self) -> &UncertaintySetSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check_input<S: Scalar>(&self, values: &[S]) -> Result<()> {
        if values.len() != self.n {
            return Err(RaiError::DimensionMismatch { expected: self.n, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RaiError::Numeric("loss vector contains non-finite entries".into()));
        }
        Ok(())
    }

    fn group_index(&self) -> &GroupIndex {
        self.groups.as_ref().expect("validated at construction")
    }

    /// FTRL step: `argmax_{w ∈ W} Σ w_i L_i + η·H(w)`.
    pub fn regularized_argmax<S: Scalar>(&self, cum_losses: &[S], reg: &RegularizerSpec) -> Result<WeightVector<S>> {
        self.check_input(cum_losses)?;
        if !(reg.strength > 0.0) || !reg.strength.is_finite() {
            return Err(RaiError::InvalidArgument(format!(
                "regularisation strength must be positive, got {}",
                reg.strength
            )));
        }
        let eta = S::of(reg.strength);
        let n = self.n;
        let w = match &self.spec {
            UncertaintySetSpec::Erm => vec![S::one() / S::of_usize(n); n],
            UncertaintySetSpec::Simplex => softmax(cum_losses, eta),
            UncertaintySetSpec::Cvar { alpha } => {
                let logs: Vec<S> = cum_losses.iter().map(|&l| l / eta).collect();
                cvar::capped_softmax(&logs, self.cvar_cap::<S>(*alpha))
            }
            UncertaintySetSpec::Group => {
                let g = self.group_index();
                let means = g.means(cum_losses);
                // H(w) = H(v) + Σ v_k ln|G_k|, so group masses ∝ |G_k| exp(mean_k / η).
                let logits: Vec<S> = means
                    .iter()
                    .zip(&g.sizes)
                    .map(|(&m, &c)| m / eta + S::of_usize(c).ln())
                    .collect();
                g.spread(&softmax(&logits, S::one()))
            }
            UncertaintySetSpec::Kl { .. } | UncertaintySetSpec::Chi2 { .. } | UncertaintySetSpec::Intersection { .. } => {
                self.solve_separable(cum_losses, eta)?
            }
        };
        self.finish(w)
    }

    /// `max_{w ∈ W} Σ w_i ℓ_i` together with a maximiser.
    pub fn linear_max<S: Scalar>(&self, losses: &[S]) -> Result<(S, WeightVector<S>)> {
        self.check_input(losses)?;
        let n = self.n;
        let (value, w) = match &self.spec {
            UncertaintySetSpec::Erm => {
                let w = vec![S::one() / S::of_usize(n); n];
                (losses.iter().copied().sum::<S>() / S::of_usize(n), w)
            }
            UncertaintySetSpec::Simplex => {
                let best = argmax_lowest(losses);
                let mut w = vec![S::zero(); n];
                w[best] = S::one();
                (losses[best], w)
            }
            UncertaintySetSpec::Cvar { alpha } => cvar::cvar_linear_max(losses, self.cvar_cap::<S>(*alpha)),
            UncertaintySetSpec::Group => {
                let g = self.group_index();
                let means = g.means(losses);
                let worst = argmax_lowest(&means);
                let mut masses = vec![S::zero(); g.count()];
                masses[worst] = S::one();
                (means[worst], g.spread(&masses))
            }
            UncertaintySetSpec::Chi2 { rho } => divergence::chi2_linear_max(losses, S::of(*rho)),
            UncertaintySetSpec::Kl { rho } => divergence::kl_linear_max(losses, S::of(*rho)),
            UncertaintySetSpec::Intersection { .. } => {
                // A vanishing entropy term selects a unique maximiser; its value is
                // within η·ln n of the linear optimum.
                let eta = S::epsilon().sqrt() * S::of(0.1);
                let w = self.solve_separable(losses, eta)?;
                let value = crate::scalar::dot(losses, &w);
                (value, w)
            }
        };
        Ok((value, WeightVector::new_unchecked(w)))
    }

    /// Regulariser value used by the smoothed objective: `H(w)`, or 0 for the
    /// singleton ERM set.
    pub fn regularizer_value<S: Scalar>(&self, w: &[S]) -> S {
        match self.spec {
            UncertaintySetSpec::Erm => S::zero(),
            _ => entropy(w),
        }
    }

    pub fn membership<S: Scalar>(&self, w: &[S]) -> Membership {
        let mut violations = Vec::new();
        let tol = MEMBERSHIP_TOLERANCE;
        let mut flag = |constraint: String, amount: f64| {
            if amount > tol {
                violations.push(Violation { constraint, amount });
            }
        };
        if w.len() != self.n {
            flag(format!("length {} != {}", w.len(), self.n), f64::INFINITY);
            return Membership { feasible: false, violations };
        }
        let wf: Vec<f64> = w.iter().map(|x| x.as_f64()).collect();
        for (i, &x) in wf.iter().enumerate() {
            flag(format!("w[{i}] >= 0"), -x);
        }
        flag("sum(w) = 1".into(), (wf.iter().sum::<f64>() - 1.0).abs());
        self.spec_membership(&self.spec, &wf, &mut flag);
        let feasible = violations.is_empty();
        Membership { feasible, violations }
    }

    fn spec_membership(&self, spec: &UncertaintySetSpec, w: &[f64], flag: &mut impl FnMut(String, f64)) {
        let n = self.n as f64;
        match spec {
            UncertaintySetSpec::Simplex => {}
            UncertaintySetSpec::Erm => {
                for (i, &x) in w.iter().enumerate() {
                    flag(format!("w[{i}] = 1/n"), (x - 1.0 / n).abs());
                }
            }
            UncertaintySetSpec::Cvar { alpha } => {
                let cap = 1.0 / (alpha * n);
                for (i, &x) in w.iter().enumerate() {
                    flag(format!("w[{i}] <= 1/(alpha n)"), x - cap);
                }
            }
            UncertaintySetSpec::Chi2 { rho } => flag("chi2(w) <= rho".into(), chi2_divergence(w) - rho),
            UncertaintySetSpec::Kl { rho } => flag("kl(w) <= rho".into(), kl_divergence(w) - rho),
            UncertaintySetSpec::Group => {
                let g = self.group_index();
                let means = g.means(w);
                for (i, &x) in w.iter().enumerate() {
                    let k = g.of_sample[i];
                    flag(format!("w[{i}] uniform within group {k}"), (x - means[k]).abs());
                }
            }
            UncertaintySetSpec::Intersection { members } => {
                for m in members {
                    self.spec_membership(m, w, flag);
                }
            }
        }
    }

    fn cvar_cap<S: Scalar>(&self, alpha: f64) -> S {
        S::one() / (S::of(alpha) * S::of_usize(self.n))
    }

    fn finish<S: Scalar>(&self, mut w: Vec<S>) -> Result<WeightVector<S>> {
        if w.iter().any(|x| !x.is_finite()) {
            return Err(RaiError::Numeric("oracle produced non-finite weights".into()));
        }
        crate::scalar::renormalize(&mut w);
        Ok(WeightVector::new_unchecked(w))
    }

    /// Builds and solves the separable dual problem for KL, χ² and intersections.
    fn solve_separable<S: Scalar>(&self, scores: &[S], eta: S) -> Result<Vec<S>> {
        let members: Vec<&UncertaintySetSpec> = match &self.spec {
            UncertaintySetSpec::Intersection { members } => members.iter().collect(),
            other => vec![other],
        };
        if members.iter().any(|m| matches!(m, UncertaintySetSpec::Erm)) {
            // The uniform distribution lies in every supported set.
            return Ok(vec![S::one() / S::of_usize(self.n); self.n]);
        }
        let grouped = members.iter().any(|m| matches!(m, UncertaintySetSpec::Group));
        let (coord_scores, base) = if grouped {
            let g = self.group_index();
            (g.means(scores), g.sizes.iter().map(|&c| S::of_usize(c)).collect::<Vec<S>>())
        } else {
            (scores.to_vec(), vec![S::one(); self.n])
        };
        let mut caps = vec![S::infinity(); base.len()];
        let mut kl_radius = None;
        let mut chi2_radius = None;
        for m in &members {
            match m {
                UncertaintySetSpec::Cvar { alpha } => {
                    let cap = self.cvar_cap::<S>(*alpha);
                    for (c, &b) in caps.iter_mut().zip(&base) {
                        *c = cap * b;
                    }
                }
                UncertaintySetSpec::Kl { rho } => kl_radius = Some(S::of(*rho)),
                UncertaintySetSpec::Chi2 { rho } => chi2_radius = Some(S::of(*rho)),
                _ => {}
            }
        }
        let problem = SeparableProblem {
            scores: coord_scores,
            base,
            caps,
            samples: self.n,
            eta,
            kl_radius,
            chi2_radius,
        };
        let v = problem.solve();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(RaiError::Numeric("separable solver diverged".into()));
        }
        Ok(if grouped { self.group_index().spread(&v) } else { v })
    }
}

/// `softmax(values / eta)` via log-sum-exp.
fn softmax<S: Scalar>(values: &[S], eta: S) -> Vec<S> {
    let logs: Vec<S> = values.iter().map(|&v| v / eta).collect();
    let lse = crate::scalar::log_sum_exp(logs.iter().copied());
    logs.iter().map(|&l| (l - lse).exp()).collect()
}

fn argmax_lowest<S: Scalar>(values: &[S]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
