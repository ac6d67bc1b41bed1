//! Voxel-wise uncertainty from a stack of class-probability samples.
//!
//! All three measures are normalized to `[0, 1]` (entropy and mutual
//! information by `ln C`, variance by its maximum 0.25), scaled to the
//! `0..=100` integer scale and rounded half away from zero.
//!
//! Per-voxel sums over samples are taken in sorted order so the result does
//! not depend on the order of the samples in the stack.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volio::{ProbabilityStack, UncertaintyMap, MAX_UNCERTAINTY};

/// Largest possible population variance of a quantity in `[0, 1]`.
pub const MAX_VARIANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Entropy,
    Variance,
    MutualInformation,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [
        MeasureKind::Entropy,
        MeasureKind::Variance,
        MeasureKind::MutualInformation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Entropy => "entropy",
            MeasureKind::Variance => "variance",
            MeasureKind::MutualInformation => "mi",
        }
    }

    pub fn min_samples(self) -> usize {
        match self {
            MeasureKind::Entropy => 1,
            MeasureKind::Variance | MeasureKind::MutualInformation => 2,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entropy" => Ok(MeasureKind::Entropy),
            "variance" | "var" => Ok(MeasureKind::Variance),
            "mi" | "mutual_information" => Ok(MeasureKind::MutualInformation),
            other => Err(Error::InvalidArgument(format!(
                "unknown measure `{other}` (expected entropy, variance or mi)"
            ))),
        }
    }
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Mean class vector over the `K` samples of one voxel. `samples` is
/// sample-major: `samples[k * classes + c]`.
pub fn voxel_mean(samples: &[f64], classes: usize) -> Vec<f64> {
    let k = samples.len() / classes;
    let mut column = Vec::with_capacity(k);
    (0..classes)
        .map(|c| {
            column.clear();
            column.extend((0..k).map(|s| samples[s * classes + c]));
            // offsets from the column minimum, so identical samples give
            // their value back exactly
            let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
            column.iter_mut().for_each(|x| *x -= lo);
            lo + sorted_sum(&mut column) / k as f64
        })
        .collect()
}

/// Entropy of the mean prediction divided by `ln C`.
pub fn entropy_score(samples: &[f64], classes: usize) -> f64 {
    shannon_entropy(&voxel_mean(samples, classes)) / (classes as f64).ln()
}

/// Population variance of each class probability across samples, averaged
/// over classes and divided by 0.25.
pub fn variance_score(samples: &[f64], classes: usize) -> f64 {
    let k = samples.len() / classes;
    let mean = voxel_mean(samples, classes);
    let mut sq = Vec::with_capacity(k);
    let per_class: f64 = (0..classes)
        .map(|c| {
            sq.clear();
            sq.extend((0..k).map(|s| (samples[s * classes + c] - mean[c]).powi(2)));
            sorted_sum(&mut sq) / k as f64
        })
        .sum();
    per_class / classes as f64 / MAX_VARIANCE
}

/// `H(mean) - mean_k H(p_k)` in nats, before clamping. Non-negative up to
/// rounding error by concavity of entropy.
pub fn mutual_information_raw(samples: &[f64], classes: usize) -> f64 {
    let k = samples.len() / classes;
    let mut entropies: Vec<f64> = samples.chunks_exact(classes).map(shannon_entropy).collect();
    shannon_entropy(&voxel_mean(samples, classes)) - sorted_sum(&mut entropies) / k as f64
}

/// Mutual information clamped at 0 and divided by `ln C`.
pub fn mutual_information_score(samples: &[f64], classes: usize) -> f64 {
    mutual_information_raw(samples, classes).max(0.0) / (classes as f64).ln()
}

/// Maps a `[0, 1]` score onto the integer uncertainty scale.
pub fn to_scale(score: f64) -> u8 {
    (score * MAX_UNCERTAINTY as f64)
        .round()
        .clamp(0.0, MAX_UNCERTAINTY as f64) as u8
}

fn voxel_samples(stack: &ProbabilityStack, v: usize, buf: &mut Vec<f64>) {
    buf.clear();
    for k in 0..stack.samples() {
        for c in 0..stack.classes() {
            buf.push(stack.prob(k, c, v) as f64);
        }
    }
}

/// Voxel-wise mean over the samples, class-major: `out[c * V + v]`.
pub fn mean_prediction(stack: &ProbabilityStack) -> Vec<f64> {
    let (classes, voxels) = (stack.classes(), stack.voxel_count());
    let per_voxel: Vec<Vec<f64>> = (0..voxels)
        .into_par_iter()
        .map_init(Vec::new, |buf, v| {
            voxel_samples(stack, v, buf);
            voxel_mean(buf, classes)
        })
        .collect();
    let mut out = vec![0.0; classes * voxels];
    for (v, mean) in per_voxel.into_iter().enumerate() {
        for (c, m) in mean.into_iter().enumerate() {
            out[c * voxels + v] = m;
        }
    }
    out
}

fn map_voxels(
    stack: &ProbabilityStack,
    score: impl Fn(&[f64], usize) -> f64 + Sync,
) -> Result<UncertaintyMap> {
    let classes = stack.classes();
    let voxels: Vec<u8> = (0..stack.voxel_count())
        .into_par_iter()
        .map_init(Vec::new, |buf, v| {
            voxel_samples(stack, v, buf);
            to_scale(score(buf, classes))
        })
        .collect();
    UncertaintyMap::new(stack.dims(), stack.header().case_id.clone(), voxels)
}

fn require(stack: &ProbabilityStack, kind: MeasureKind) -> Result<()> {
    if stack.classes() < 2 {
        return Err(Error::TooFewClasses(stack.classes()));
    }
    if stack.samples() < kind.min_samples() {
        return Err(Error::KTooSmall(stack.samples()));
    }
    Ok(())
}

/// Predictive entropy. Defined for a single sample (a deterministic
/// network's softmax).
pub fn entropy_measure(stack: &ProbabilityStack) -> Result<UncertaintyMap> {
    require(stack, MeasureKind::Entropy)?;
    map_voxels(stack, entropy_score)
}

pub fn variance_measure(stack: &ProbabilityStack) -> Result<UncertaintyMap> {
    require(stack, MeasureKind::Variance)?;
    map_voxels(stack, variance_score)
}

pub fn mi_measure(stack: &ProbabilityStack) -> Result<UncertaintyMap> {
    require(stack, MeasureKind::MutualInformation)?;
    map_voxels(stack, mutual_information_score)
}

pub fn measure(kind: MeasureKind, stack: &ProbabilityStack) -> Result<UncertaintyMap> {
    match kind {
        MeasureKind::Entropy => entropy_measure(stack),
        MeasureKind::Variance => variance_measure(stack),
        MeasureKind::MutualInformation => mi_measure(stack),
    }
}
