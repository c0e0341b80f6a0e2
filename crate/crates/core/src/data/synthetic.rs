use serde::{Deserialize, Serialize};

use super::{Dataset, Sample};
use crate::error::{RaiError, Result};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyntheticKind {
    DatasetI,
    DatasetII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub which: SyntheticKind,
    pub n: usize,
    pub seed: u64,
}

/// One isotropic Gaussian component of a class-conditional mixture.
struct Component {
    weight: f64,
    mean: [f64; 2],
    variance: f64,
}

const P_CLASS0: f64 = 0.7;

/// Dataset-I class-1 mixture: equal thirds, identity covariance.
const DATASET1_CLASS1: [Component; 3] = [
    Component { weight: 1.0 / 3.0, mean: [-3.0, 1.0], variance: 1.0 },
    Component { weight: 1.0 / 3.0, mean: [3.0, 0.0], variance: 1.0 },
    Component { weight: 1.0 / 3.0, mean: [0.0, -3.0], variance: 1.0 },
];

/// Dataset-II class-0 mixture. The first two components share their mean as
/// printed in the source description; they stay separate groups.
const DATASET2_CLASS0: [Component; 3] = [
    Component { weight: 5.0 / 12.0, mean: [-2.0, -2.0], variance: 0.5 },
    Component { weight: 2.0 / 12.0, mean: [-2.0, -2.0], variance: 0.5 },
    Component { weight: 5.0 / 12.0, mean: [2.0, 2.0], variance: 0.5 },
];

const DATASET2_CLASS1: [Component; 2] = [
    Component { weight: 2.0 / 5.0, mean: [-3.0, 0.0], variance: 0.3 },
    Component { weight: 3.0 / 5.0, mean: [3.0, 0.0], variance: 0.3 },
];

fn pick(components: &[Component], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, c) in components.iter().enumerate() {
        acc += c.weight;
        if u < acc {
            return k;
        }
    }
    components.len() - 1
}

fn draw<S: Scalar>(c: &Component, rng: &mut SplitMix64) -> Vec<S> {
    let sd = c.variance.sqrt();
    c.mean.iter().map(|&m| S::of(m + sd * rng.gaussian())).collect()
}

fn check(spec: &SyntheticSpec, expected: SyntheticKind) -> Result<()> {
    if spec.which != expected {
        return Err(RaiError::InvalidSpec(format!(
            "generator for {expected:?} called with {:?}",
            spec.which
        )));
    }
    if spec.n < 2 {
        return Err(RaiError::InvalidSpec(format!("n must be >= 2, got {}", spec.n)));
    }
    Ok(())
}

/// Imbalanced binary problem: class 0 is a unit Gaussian at the origin, class 1
/// three unit Gaussians around it. Group id = class label.
///
/// Per sample the stream is consumed as: one uniform for the class, one uniform
/// for the class-1 component (class 1 only), then two Gaussians.
pub fn gen_dataset_1<S: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<S>> {
    check(spec, SyntheticKind::DatasetI)?;
    let mut rng = SplitMix64::new(spec.seed);
    let class0 = Component { weight: 1.0, mean: [0.0, 0.0], variance: 1.0 };
    let samples = (0..spec.n)
        .map(|_| {
            let label = usize::from(rng.uniform() >= P_CLASS0);
            let component = if label == 0 {
                &class0
            } else {
                &DATASET1_CLASS1[pick(&DATASET1_CLASS1, rng.uniform())]
            };
            Sample {
                features: draw(component, &mut rng),
                label,
                group: Some(label),
            }
        })
        .collect();
    Dataset::new(samples, 2, 2, spec.seed)
}

/// Five-component problem with per-component noise levels. Group id is the
/// component index: 0..=2 for class 0, 3..=4 for class 1.
///
/// Per sample: one uniform for the class, one for the component, two Gaussians.
pub fn gen_dataset_2<S: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<S>> {
    check(spec, SyntheticKind::DatasetII)?;
    let mut rng = SplitMix64::new(spec.seed);
    let samples = (0..spec.n)
        .map(|_| {
            let label = usize::from(rng.uniform() >= P_CLASS0);
            let u = rng.uniform();
            let (group, component) = if label == 0 {
                let k = pick(&DATASET2_CLASS0, u);
                (k, &DATASET2_CLASS0[k])
            } else {
                let k = pick(&DATASET2_CLASS1, u);
                (DATASET2_CLASS0.len() + k, &DATASET2_CLASS1[k])
            };
            Sample {
                features: draw(component, &mut rng),
                label,
                group: Some(group),
            }
        })
        .collect();
    Dataset::new(samples, 2, 5, spec.seed)
}

pub fn generate<S: Scalar>(spec: &SyntheticSpec) -> Result<Dataset<S>> {
    match spec.which {
        SyntheticKind::DatasetI => gen_dataset_1(spec),
        SyntheticKind::DatasetII => gen_dataset_2(spec),
    }
}
