//! Randomized ensembles `Q`, their plurality-vote derandomization, and the
//! evaluation metrics built on both.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{RaiError, Result};
use crate::learners::{loss_row, Hypothesis};
use crate::scalar::Scalar;
use crate::uncertainty::UncertaintySet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct Member<S> {
    pub mass: S,
    pub hypothesis: Hypothesis<S>,
}

/// A finite mixture of hypotheses. Masses are kept unnormalized while a solver
/// runs (generalised AdaBoost grows them freely) and normalized on output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields, try_from = "Repr<S>")]
pub struct Ensemble<S> {
    members: Vec<Member<S>>,
    normalized: bool,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
struct Repr<S> {
    members: Vec<Member<S>>,
    normalized: bool,
}

impl<S: Scalar> TryFrom<Repr<S>> for Ensemble<S> {
    type Error = RaiError;

    fn try_from(r: Repr<S>) -> Result<Self> {
        let mut e = Ensemble::new();
        for m in r.members {
            e.push(m.hypothesis, m.mass)?;
        }
        if r.normalized && !e.is_empty() {
            let total = e.total_mass().as_f64();
            if (total - 1.0).abs() > 1e-6 {
                return Err(RaiError::InvalidArgument(format!(
                    "ensemble marked normalized but masses sum to {total}"
                )));
            }
        }
        e.normalized = r.normalized;
        Ok(e)
    }
}

impl<S: Scalar> Default for Ensemble<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Ensemble<S> {
    pub fn new() -> Self {
        Ensemble { members: Vec::new(), normalized: false }
    }

    /// Uniform mixture over `hypotheses`.
    pub fn uniform(hypotheses: Vec<Hypothesis<S>>) -> Result<Self> {
        let mut e = Ensemble::new();
        for h in hypotheses {
            e.push(h, S::one())?;
        }
        Ok(e.normalized())
    }

    pub fn push(&mut self, hypothesis: Hypothesis<S>, mass: S) -> Result<()> {
        if !(mass >= S::zero()) || !mass.is_finite() {
            return Err(RaiError::InvalidArgument(format!("member mass must be finite and >= 0, got {mass}")));
        }
        self.members.push(Member { mass, hypothesis });
        self.normalized = false;
        Ok(())
    }

    pub fn members(&self) -> &[Member<S>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> S {
        self.members.iter().map(|m| m.mass).sum()
    }

    /// Mixture probabilities `Q(h_k)`.
    pub fn probabilities(&self) -> Result<Vec<S>> {
        let total = self.total_mass();
        if self.is_empty() || !(total > S::zero()) {
            return Err(RaiError::InvalidArgument("ensemble has no positive mass".into()));
        }
        Ok(self.members.iter().map(|m| m.mass / total).collect())
    }

    pub fn normalized(&self) -> Self {
        let mut e = self.clone();
        if let Ok(p) = self.probabilities() {
            for (m, q) in e.members.iter_mut().zip(p) {
                m.mass = q;
            }
            e.normalized = true;
        }
        e
    }

    pub fn cast<T: Scalar>(&self) -> Ensemble<T> {
        Ensemble {
            members: self
                .members
                .iter()
                .map(|m| Member { mass: T::of(m.mass.as_f64()), hypothesis: m.hypothesis.cast() })
                .collect(),
            normalized: self.normalized,
        }
    }

    /// Writes the normalized ensemble as JSON.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.normalized())?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// `E_{h~Q} ℓ(h(x_i), y_i)` for every sample.
    pub fn mean_loss(&self, dataset: &Dataset<S>) -> Result<Vec<S>> {
        let p = self.probabilities()?;
        let mut acc = vec![S::zero(); dataset.len()];
        for (m, q) in self.members.iter().zip(p) {
            if q == S::zero() {
                continue;
            }
            for (a, l) in acc.iter_mut().zip(loss_row(&m.hypothesis, dataset)?) {
                *a += q * l;
            }
        }
        Ok(acc)
    }

    /// Per-sample vote shares `P_Q[h(x_i) = y]`, one row per sample.
    pub fn vote_shares(&self, dataset: &Dataset<S>) -> Result<Vec<Vec<S>>> {
        let p = self.probabilities()?;
        let preds = self
            .members
            .iter()
            .map(|m| m.hypothesis.predict_all(dataset))
            .collect::<Result<Vec<_>>>()?;
        let width = preds
            .iter()
            .flatten()
            .map(|&y| y + 1)
            .max()
            .unwrap_or(0)
            .max(dataset.classes());
        let mut shares = vec![vec![S::zero(); width]; dataset.len()];
        for (row, q) in preds.iter().zip(p) {
            for (share, &y) in shares.iter_mut().zip(row) {
                share[y] += q;
            }
        }
        Ok(shares)
    }

    /// Plurality-vote label for one input; ties go to the lowest label.
    pub fn derandomize_predict(&self, x: &[S]) -> Result<usize> {
        let p = self.probabilities()?;
        let mut votes: Vec<S> = Vec::new();
        for (m, q) in self.members.iter().zip(p) {
            let y = m.hypothesis.predict(x)?;
            if votes.len() <= y {
                votes.resize(y + 1, S::zero());
            }
            votes[y] += q;
        }
        Ok(plurality(&votes))
    }

    pub fn derandomized_predictions(&self, dataset: &Dataset<S>) -> Result<Vec<usize>> {
        Ok(self.vote_shares(dataset)?.iter().map(|v| plurality(v)).collect())
    }

    /// Zero-one loss of the derandomized classifier on every sample.
    pub fn deterministic_loss(&self, dataset: &Dataset<S>) -> Result<Vec<S>> {
        Ok(self
            .derandomized_predictions(dataset)?
            .iter()
            .zip(dataset.samples())
            .map(|(&y, s)| if y == s.label { S::zero() } else { S::one() })
            .collect())
    }

    /// `max_{w ∈ W} E_{h~Q} E_w ℓ`.
    pub fn randomized_risk(&self, dataset: &Dataset<S>, set: &UncertaintySet) -> Result<S> {
        Ok(set.linear_max(&self.mean_loss(dataset)?)?.0)
    }

    /// `max_{w ∈ W} E_w ℓ(h_det(x), y)`.
    pub fn deterministic_risk(&self, dataset: &Dataset<S>, set: &UncertaintySet) -> Result<S> {
        Ok(set.linear_max(&self.deterministic_loss(dataset)?)?.0)
    }

    /// `γ_Q = 1 / min_i max_y P_Q[h(x_i) = y]`.
    pub fn gamma_q(&self, dataset: &Dataset<S>) -> Result<S> {
        let shares = self.vote_shares(dataset)?;
        let worst = shares
            .iter()
            .map(|v| v.iter().copied().fold(S::zero(), S::max))
            .fold(S::infinity(), S::min);
        Ok(S::one() / worst)
    }

    /// Derandomized losses aggregated overall, per class, and per group (all
    /// percent), plus the randomized/deterministic risks over `set` and `γ_Q`.
    pub fn metrics(&self, dataset: &Dataset<S>, set: &UncertaintySet) -> Result<MetricsReport> {
        let det = self.deterministic_loss(dataset)?;
        let pct = |v: S| 100.0 * v.as_f64();
        let average = pct(det.iter().copied().sum::<S>() / S::of_usize(det.len()));
        let per_class = breakdown(&det, &dataset.labels(), dataset.classes());
        let per_group = dataset.group_ids().map(|g| breakdown(&det, &g, dataset.groups()));
        let worst = |rows: &[SliceLoss]| rows.iter().map(|r| r.loss).fold(0.0, f64::max);
        Ok(MetricsReport {
            average,
            worst_class: worst(&per_class),
            worst_group: per_group.as_deref().map(worst),
            per_class,
            per_group,
            randomized_rai_risk: pct(set.linear_max(&self.mean_loss(dataset)?)?.0),
            deterministic_rai_risk: pct(set.linear_max(&det)?.0),
            gamma_q: self.gamma_q(dataset)?.as_f64(),
        })
    }
}

fn plurality<S: Scalar>(votes: &[S]) -> usize {
    let mut best = 0;
    for (y, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = y;
        }
    }
    best
}

fn breakdown<S: Scalar>(loss: &[S], ids: &[usize], count: usize) -> Vec<SliceLoss> {
    let mut sums = vec![0.0; count];
    let mut sizes = vec![0usize; count];
    for (&l, &k) in loss.iter().zip(ids) {
        sums[k] += l.as_f64();
        sizes[k] += 1;
    }
    (0..count)
        .filter(|&k| sizes[k] > 0)
        .map(|k| SliceLoss { id: k, count: sizes[k], loss: 100.0 * sums[k] / sizes[k] as f64 })
        .collect()
}

/// Loss (percent) on the samples of one class or group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceLoss {
    pub id: usize,
    pub count: usize,
    pub loss: f64,
}

/// Evaluation summary of the derandomized ensemble. Losses are percentages;
/// classes or groups with no samples are omitted from the tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub average: f64,
    pub worst_class: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_group: Option<f64>,
    pub per_class: Vec<SliceLoss>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_group: Option<Vec<SliceLoss>>,
    pub randomized_rai_risk: f64,
    pub deterministic_rai_risk: f64,
    pub gamma_q: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::UncertaintySetSpec;

    fn line(labels: &[usize]) -> Dataset<f64> {
        let samples = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| Sample { features: vec![i as f64], label: y, group: None })
            .collect();
        Dataset::from_samples(samples, 0).unwrap()
    }

    fn stump(t: f64, left: usize, right: usize) -> Hypothesis<f64> {
        Hypothesis::Stump { feature: 0, threshold: t, left, right }
    }

    #[test]
    fn even_split_vote_goes_to_label_zero() {
        let mut e = Ensemble::new();
        e.push(Hypothesis::constant(1), 0.5).unwrap();
        e.push(Hypothesis::constant(0), 0.5).unwrap();
        assert_eq!(e.derandomize_predict(&[0.0]).unwrap(), 0);
    }

    #[test]
    fn gamma_examples() {
        let d = line(&[0, 1, 0]);
        let unanimous = Ensemble::uniform(vec![Hypothesis::constant(0); 3]).unwrap();
        assert_eq!(unanimous.gamma_q(&d).unwrap(), 1.0);
        let split = Ensemble::uniform(vec![Hypothesis::constant(0), Hypothesis::constant(1)]).unwrap();
        assert_eq!(split.gamma_q(&d).unwrap(), 2.0);
    }

    #[test]
    fn perfect_classifier_has_zero_metrics() {
        let d = line(&[0, 0, 1, 1]);
        let e = Ensemble::uniform(vec![stump(1.5, 0, 1)]).unwrap();
        let set = UncertaintySet::for_dataset(UncertaintySetSpec::Simplex, &d).unwrap();
        let m = e.metrics(&d, &set).unwrap();
        assert_eq!((m.average, m.worst_class, m.randomized_rai_risk, m.deterministic_rai_risk), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(m.worst_group, None);
    }

    #[test]
    fn binary_simplex_risks() {
        // Member A errs on sample 0 only, member B on sample 2 only.
        let d = line(&[1, 0, 0]);
        let simplex = UncertaintySet::for_dataset(UncertaintySetSpec::Simplex, &d).unwrap();
        let mut e = Ensemble::new();
        e.push(Hypothesis::constant(0), 0.6).unwrap();
        e.push(stump(0.5, 1, 0), 0.4).unwrap();
        assert!((e.randomized_risk(&d, &simplex).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(e.deterministic_risk(&d, &simplex).unwrap(), 1.0);
        let mut e = Ensemble::new();
        e.push(Hypothesis::constant(0), 0.4).unwrap();
        e.push(stump(0.5, 1, 0), 0.6).unwrap();
        assert!((e.randomized_risk(&d, &simplex).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(e.deterministic_risk(&d, &simplex).unwrap(), 0.0);
    }

    #[test]
    fn average_is_class_frequency_weighted() {
        let d = line(&[0, 0, 0, 1, 1]);
        let e = Ensemble::uniform(vec![stump(0.5, 1, 0)]).unwrap();
        let set = UncertaintySet::for_dataset(UncertaintySetSpec::Erm, &d).unwrap();
        let m = e.metrics(&d, &set).unwrap();
        let weighted: f64 = m.per_class.iter().map(|c| c.loss * c.count as f64).sum::<f64>() / 5.0;
        assert!((m.average - weighted).abs() < 1e-9);
        assert!((m.average - 60.0).abs() < 1e-12);
        assert_eq!(m.worst_class, 100.0);
    }

    #[test]
    fn json_layout_and_validation() {
        let mut e = Ensemble::new();
        e.push(Hypothesis::constant(1), 3.0).unwrap();
        e.push(stump(0.25, 0, 1), 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(e.normalized()).unwrap();
        assert_eq!(v["normalized"], true);
        assert_eq!(v["members"][0]["mass"], 0.75);
        assert_eq!(v["members"][1]["hypothesis"]["kind"], "stump");
        let back: Ensemble<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, e.normalized());
        let bad = r#"{"members":[{"mass":-1.0,"hypothesis":{"kind":"stump","feature":0,"threshold":0.0,"left":0,"right":0}}],"normalized":false}"#;
        assert!(serde_json::from_str::<Ensemble<f64>>(bad).is_err());
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        let d = line(&[0, 1]);
        assert!(Ensemble::<f64>::new().mean_loss(&d).is_err());
    }
}
