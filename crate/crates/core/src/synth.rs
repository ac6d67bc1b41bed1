//! Synthetic (ground truth, prediction, uncertainty) triples with exactly
//! known confusion/confidence structure, plus the closed-form curves they
//! must produce.
//!
//! Voxels are partitioned by index into eight contiguous blocks, one per
//! (outcome, confidence) category. Each voxel's uncertainty is drawn
//! uniformly from its category's range with a ChaCha stream keyed by
//! `(seed, voxel index)`, so output does not depend on evaluation order.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::{ConfusionAtTau, ThresholdGrid};
use crate::regions::BinaryMask;
use crate::scoring::{curve_set, CurveSet};
use crate::volio::{
    payload_path_for, write_atomic, write_raw_volume, UncertaintyMap, Volume, MAX_UNCERTAINTY,
};

/// One value per (outcome, confidence) category.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerCategory<T> {
    pub tp_confident: T,
    pub tp_uncertain: T,
    pub fp_confident: T,
    pub fp_uncertain: T,
    pub tn_confident: T,
    pub tn_uncertain: T,
    pub fn_confident: T,
    pub fn_uncertain: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    TP,
    FP,
    TN,
    FN,
}

impl Outcome {
    /// `(pred, gt)` bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Outcome::TP => (true, true),
            Outcome::FP => (true, false),
            Outcome::TN => (false, false),
            Outcome::FN => (false, true),
        }
    }
}

/// Category order used for index partitioning: outcome-major, confident
/// before uncertain.
pub const CATEGORIES: [(Outcome, bool); 8] = [
    (Outcome::TP, false),
    (Outcome::TP, true),
    (Outcome::FP, false),
    (Outcome::FP, true),
    (Outcome::TN, false),
    (Outcome::TN, true),
    (Outcome::FN, false),
    (Outcome::FN, true),
];

impl<T: Copy> PerCategory<T> {
    pub fn to_array(&self) -> [T; 8] {
        [
            self.tp_confident,
            self.tp_uncertain,
            self.fp_confident,
            self.fp_uncertain,
            self.tn_confident,
            self.tn_uncertain,
            self.fn_confident,
            self.fn_uncertain,
        ]
    }

    pub fn from_array(a: [T; 8]) -> Self {
        Self {
            tp_confident: a[0],
            tp_uncertain: a[1],
            fp_confident: a[2],
            fp_uncertain: a[3],
            tn_confident: a[4],
            tn_uncertain: a[5],
            fn_confident: a[6],
            fn_uncertain: a[7],
        }
    }
}

/// Inclusive integer interval on the uncertainty scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u8; 2]", into = "[u8; 2]")]
pub struct UncRange {
    pub lo: u8,
    pub hi: u8,
}

impl UncRange {
    pub fn new(lo: u8, hi: u8) -> Self {
        Self { lo, hi }
    }

    /// Whether every value in the range is retained (`Some(true)`), every
    /// value is filtered (`Some(false)`), or the threshold splits the range.
    pub fn retained_at(self, tau: u8) -> Option<bool> {
        if tau == MAX_UNCERTAINTY || tau > self.hi {
            Some(true)
        } else if tau <= self.lo {
            Some(false)
        } else {
            None
        }
    }
}

impl From<[u8; 2]> for UncRange {
    fn from(a: [u8; 2]) -> Self {
        Self { lo: a[0], hi: a[1] }
    }
}

impl From<UncRange> for [u8; 2] {
    fn from(r: UncRange) -> Self {
        [r.lo, r.hi]
    }
}

fn default_case_id() -> String {
    "synth".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub dims: [usize; 3],
    pub fractions: PerCategory<f64>,
    pub confident_range: UncRange,
    pub uncertain_range: UncRange,
    pub seed: u64,
    #[serde(default = "default_case_id")]
    pub case_id: String,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::SpecInvalid(format!(
                "dims {:?} has an empty axis",
                self.dims
            )));
        }
        let f = self.fractions.to_array();
        if f.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::SpecInvalid(
                "fractions must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::SpecInvalid(format!("fractions sum to {sum}, not 1")));
        }
        for (name, r) in [
            ("confident", self.confident_range),
            ("uncertain", self.uncertain_range),
        ] {
            if r.lo > r.hi || r.hi > MAX_UNCERTAINTY {
                return Err(Error::SpecInvalid(format!(
                    "{name} range [{}, {}] is not an interval within [0, 100]",
                    r.lo, r.hi
                )));
            }
        }
        if self.confident_range.hi >= self.uncertain_range.lo {
            return Err(Error::SpecInvalid(
                "confident range must lie strictly below the uncertain range".into(),
            ));
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    fn range_for(&self, uncertain: bool) -> UncRange {
        if uncertain {
            self.uncertain_range
        } else {
            self.confident_range
        }
    }
}

/// Converts fractions to integer counts summing to `total` with the
/// largest-remainder method; ties go to the earlier category.
pub fn apportion(fractions: &[f64; 8], total: u64) -> [u64; 8] {
    let sum: f64 = fractions.iter().sum();
    let quotas: Vec<f64> = fractions.iter().map(|f| f / sum * total as f64).collect();
    let mut counts = [0u64; 8];
    for (c, q) in counts.iter_mut().zip(&quotas) {
        *c = q.floor() as u64;
    }
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..8).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    counts
}

/// Generated volumes plus the realized per-category counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthVolumes {
    pub gt: BinaryMask,
    pub pred: BinaryMask,
    pub unc: UncertaintyMap,
    pub expected: PerCategory<u64>,
}

#[inline]
fn draw(seed: u64, index: usize, range: UncRange) -> u8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen_range(range.lo..=range.hi)
}

pub fn generate(spec: &SynthSpec) -> Result<SynthVolumes> {
    spec.validate()?;
    let n = spec.voxel_count();
    let counts = apportion(&spec.fractions.to_array(), n as u64);

    // category index for every voxel, by contiguous blocks
    let mut category = Vec::with_capacity(n);
    for (i, &c) in counts.iter().enumerate() {
        category.extend(std::iter::repeat_n(i as u8, c as usize));
    }

    let unc: Vec<u8> = category
        .par_iter()
        .enumerate()
        .map(|(v, &cat)| {
            let (_, uncertain) = CATEGORIES[cat as usize];
            draw(spec.seed, v, spec.range_for(uncertain))
        })
        .collect();
    let (pred, gt): (Vec<bool>, Vec<bool>) = category
        .iter()
        .map(|&cat| CATEGORIES[cat as usize].0.bits())
        .unzip();

    Ok(SynthVolumes {
        gt: BinaryMask::from_bits(spec.dims, spec.case_id.clone(), gt)?,
        pred: BinaryMask::from_bits(spec.dims, spec.case_id.clone(), pred)?,
        unc: UncertaintyMap::new(spec.dims, spec.case_id.clone(), unc)?,
        expected: PerCategory::from_array(counts),
    })
}

/// Expected curves computed from category counts and range geometry alone.
/// Every threshold must either retain or filter each range entirely.
pub fn oracle_curves(
    expected: &PerCategory<u64>,
    confident_range: UncRange,
    uncertain_range: UncRange,
    grid: &ThresholdGrid,
) -> Result<CurveSet> {
    let counts = expected.to_array();
    let mut sweep = Vec::with_capacity(grid.len());
    for &tau in grid.taus() {
        let mut keep = [false; 2];
        for (slot, r) in keep.iter_mut().zip([confident_range, uncertain_range]) {
            *slot = r.retained_at(tau).ok_or(Error::GridIntersectsRange {
                tau,
                lo: r.lo,
                hi: r.hi,
            })?;
        }
        let mut by_outcome = [0u64; 4];
        for (i, &(outcome, uncertain)) in CATEGORIES.iter().enumerate() {
            if keep[uncertain as usize] {
                by_outcome[outcome as usize] += counts[i];
            }
        }
        let [tp, fp, tn, fn_] = by_outcome;
        sweep.push(ConfusionAtTau::from_counts(tau, tp, fp, tn, fn_));
    }
    curve_set(&sweep)
}

/// Builds a 1-D triple whose sweep over the targets' thresholds reproduces
/// the target confusion counts exactly. Targets must be ascending in `tau`,
/// end at 100, and have non-decreasing counts.
pub fn realize_sweep(
    targets: &[ConfusionAtTau],
    case_id: &str,
) -> Result<(BinaryMask, BinaryMask, UncertaintyMap)> {
    let taus: Vec<u8> = targets.iter().map(|t| t.tau).collect();
    ThresholdGrid::new(taus).map_err(|e| Error::SpecInvalid(e.to_string()))?;
    let counts = |c: &ConfusionAtTau| [c.tp, c.fp, c.tn, c.fn_];
    if targets[0].tau == 0 && counts(&targets[0]).iter().any(|&x| x > 0) {
        return Err(Error::SpecInvalid(
            "nothing can be retained at tau = 0".into(),
        ));
    }
    let mut pred = Vec::new();
    let mut gt = Vec::new();
    let mut unc = Vec::new();
    let mut prev = [0u64; 4];
    for (i, t) in targets.iter().enumerate() {
        let now = counts(t);
        let u = if i == 0 { 0 } else { targets[i - 1].tau };
        for (j, outcome) in [Outcome::TP, Outcome::FP, Outcome::TN, Outcome::FN]
            .into_iter()
            .enumerate()
        {
            let added = now[j].checked_sub(prev[j]).ok_or_else(|| {
                Error::SpecInvalid(format!(
                    "counts decrease between thresholds at tau = {}",
                    t.tau
                ))
            })?;
            let (p, g) = outcome.bits();
            for _ in 0..added {
                pred.push(p);
                gt.push(g);
                unc.push(u);
            }
        }
        prev = now;
    }
    let dims = [pred.len().max(1), 1, 1];
    if pred.is_empty() {
        pred.push(false);
        gt.push(false);
        unc.push(0);
    }
    Ok((
        BinaryMask::from_bits(dims, case_id, pred)?,
        BinaryMask::from_bits(dims, case_id, gt)?,
        UncertaintyMap::new(dims, case_id, unc)?,
    ))
}

/// Label value written where a synthetic mask is set. Label 4 belongs to
/// every region, so WT, TC and ET all evaluate the same mask.
pub const SYNTH_LABEL: u8 = 4;

/// Writes `gt.json`, `pred.json`, `unc.json` (with `.raw` payloads) and
/// `expected.json` into `dir`.
pub fn write_triple(volumes: &SynthVolumes, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let items = [
        ("gt", Volume::Label(volumes.gt.to_labels(SYNTH_LABEL)?)),
        ("pred", Volume::Label(volumes.pred.to_labels(SYNTH_LABEL)?)),
        ("unc", Volume::Uncertainty(volumes.unc.clone())),
    ];
    for (name, vol) in &items {
        let header = dir.join(format!("{name}.json"));
        write_raw_volume(vol, &header, &payload_path_for(&header))?;
    }
    let mut text = serde_json::to_string_pretty(&volumes.expected)?;
    text.push('\n');
    write_atomic(&dir.join("expected.json"), text.as_bytes())
}
