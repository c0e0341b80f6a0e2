//! Labelled samples, CSV persistence and the synthetic Gaussian-mixture benchmarks.

mod csv_io;
mod synthetic;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv};
pub use synthetic::{gen_dataset_1, gen_dataset_2, generate, SyntheticKind, SyntheticSpec};

use crate::error::{RaiError, Result};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    pub features: Vec<S>,
    pub label: usize,
    pub group: Option<usize>,
}

/// An immutable, validated collection of samples: the ground set of the game.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<S> {
    samples: Vec<Sample<S>>,
    dim: usize,
    classes: usize,
    groups: usize,
    seed: u64,
}

impl<S: Scalar> Dataset<S> {
    /// Validates and wraps `samples`.
    ///
    /// `classes` and `groups` may be larger than the ids observed (a split can
    /// miss a class); pass `groups = 0` for ungrouped data.
    pub fn new(samples: Vec<Sample<S>>, classes: usize, groups: usize, seed: u64) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| RaiError::InvalidDataset("dataset must contain at least one sample".into()))?;
        let dim = first.features.len();
        let grouped = first.group.is_some();
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(RaiError::InvalidDataset(format!(
                    "sample {i} has {} features, expected {dim}",
                    s.features.len()
                )));
            }
            if s.features.iter().any(|x| !x.is_finite()) {
                return Err(RaiError::InvalidDataset(format!("sample {i} has a non-finite feature")));
            }
            if s.label >= classes {
                return Err(RaiError::InvalidDataset(format!(
                    "sample {i} has label {} but only {classes} classes",
                    s.label
                )));
            }
            match (grouped, s.group) {
                (true, Some(g)) if g >= groups => {
                    return Err(RaiError::InvalidDataset(format!(
                        "sample {i} has group {g} but only {groups} groups"
                    )))
                }
                (true, Some(_)) | (false, None) => {}
                _ => {
                    return Err(RaiError::InvalidDataset(
                        "either every sample carries a group id or none does".into(),
                    ))
                }
            }
        }
        Ok(Dataset {
            samples,
            dim,
            classes,
            groups: if grouped { groups } else { 0 },
            seed,
        })
    }

    /// Builds a dataset inferring class and group counts from the largest ids present.
    pub fn from_samples(samples: Vec<Sample<S>>, seed: u64) -> Result<Self> {
        let classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
        let groups = samples.iter().filter_map(|s| s.group.map(|g| g + 1)).max().unwrap_or(0);
        Self::new(samples, classes, groups, seed)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn is_grouped(&self) -> bool {
        self.groups > 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> &[Sample<S>] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &Sample<S> {
        &self.samples[i]
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Per-sample group ids, `None` when the data is ungrouped.
    pub fn group_ids(&self) -> Option<Vec<usize>> {
        if !self.is_grouped() {
            return None;
        }
        Some(self.samples.iter().map(|s| s.group.unwrap_or(0)).collect())
    }

    /// Copy of the dataset whose group ids are the class labels.
    pub fn with_class_groups(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                group: Some(s.label),
                ..s.clone()
            })
            .collect();
        Dataset {
            samples,
            groups: self.classes,
            ..self.clone()
        }
    }

    pub fn without_groups(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample { group: None, ..s.clone() })
            .collect();
        Dataset {
            samples,
            groups: 0,
            ..self.clone()
        }
    }

    /// Subset in the given index order, keeping the declared class/group counts.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let samples = indices.iter().map(|&i| self.samples[i].clone()).collect();
        Self::new(samples, self.classes, self.groups, self.seed)
    }

    /// Random partition into sizes `ceil(fraction * n)` and the remainder.
    pub fn train_test_split(&self, fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(RaiError::InvalidArgument(format!(
                "split fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let n = self.len();
        let first = ((fraction * n as f64).ceil() as usize).min(n);
        if first == 0 || first == n {
            return Err(RaiError::InvalidArgument(format!(
                "split fraction {fraction} leaves an empty side for n = {n}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        SplitMix64::new(seed).shuffle(&mut order);
        let (a, b) = order.split_at(first);
        Ok((self.subset(a)?, self.subset(b)?))
    }
}
