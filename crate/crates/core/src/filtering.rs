//! Threshold sweep over an uncertainty map.
//!
//! A voxel is *retained* at threshold `tau` iff its uncertainty is strictly
//! below `tau`; `tau = 100` is the unfiltered baseline and retains every
//! voxel, including those with uncertainty exactly 100. `tau = 0` retains
//! nothing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regions::BinaryMask;
use crate::volio::{UncertaintyMap, MAX_UNCERTAINTY};

/// Strictly increasing thresholds on the `0..=100` scale, ending at 100.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct ThresholdGrid(Vec<u8>);

impl ThresholdGrid {
    pub fn new(taus: Vec<u8>) -> Result<Self> {
        if taus.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 thresholds, got {}",
                taus.len()
            )));
        }
        if let Some(&t) = taus.iter().find(|&&t| t > MAX_UNCERTAINTY) {
            return Err(Error::InvalidGrid(format!("threshold {t} exceeds 100")));
        }
        if let Some(w) = taus.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "thresholds must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if taus.last() != Some(&MAX_UNCERTAINTY) {
            return Err(Error::InvalidGrid(
                "the last threshold must be 100 (unfiltered baseline)".into(),
            ));
        }
        Ok(Self(taus))
    }

    /// The four thresholds tabulated for the worked examples: 0.25, 0.50,
    /// 0.75, 1.00.
    pub fn quarters() -> Self {
        Self(vec![25, 50, 75, 100])
    }

    pub fn taus(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// 0, 5, 10, ..., 100.
impl Default for ThresholdGrid {
    fn default() -> Self {
        Self((0..=100).step_by(5).collect())
    }
}

impl TryFrom<Vec<u8>> for ThresholdGrid {
    type Error = Error;

    fn try_from(taus: Vec<u8>) -> Result<Self> {
        Self::new(taus)
    }
}

impl From<ThresholdGrid> for Vec<u8> {
    fn from(g: ThresholdGrid) -> Self {
        g.0
    }
}

impl FromStr for ThresholdGrid {
    type Err = Error;

    /// Parses a comma-separated list such as `25,50,75,100`.
    fn from_str(s: &str) -> Result<Self> {
        let taus = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u8>()
                    .map_err(|e| Error::InvalidGrid(format!("`{}`: {e}", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(taus)
    }
}

impl fmt::Display for ThresholdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Confusion counts among the voxels retained at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionAtTau {
    pub tau: u8,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub retained: u64,
}

impl ConfusionAtTau {
    pub fn from_counts(tau: u8, tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self {
            tau,
            tp,
            fp,
            tn,
            fn_,
            retained: tp + fp + tn + fn_,
        }
    }
}

#[inline]
pub fn is_retained(uncertainty: u8, tau: u8) -> bool {
    tau == MAX_UNCERTAINTY || uncertainty < tau
}

fn check_dims(pred: &BinaryMask, gt: &BinaryMask, unc: &UncertaintyMap) -> Result<()> {
    for other in [gt.dims(), unc.dims()] {
        if other != pred.dims() {
            return Err(Error::DimMismatch {
                left: pred.dims(),
                right: other,
            });
        }
    }
    Ok(())
}

/// Counts confusion categories among voxels retained at `tau` with a direct
/// scan.
pub fn confusion_at_tau(
    pred: &BinaryMask,
    gt: &BinaryMask,
    unc: &UncertaintyMap,
    tau: u8,
) -> Result<ConfusionAtTau> {
    check_dims(pred, gt, unc)?;
    if tau > MAX_UNCERTAINTY {
        return Err(Error::InvalidGrid(format!("threshold {tau} exceeds 100")));
    }
    let mut c = ConfusionAtTau {
        tau,
        ..Default::default()
    };
    for ((&p, &g), &u) in pred.bits().iter().zip(gt.bits()).zip(unc.voxels()) {
        if !is_retained(u, tau) {
            continue;
        }
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
        c.retained += 1;
    }
    Ok(c)
}

const BUCKETS: usize = MAX_UNCERTAINTY as usize + 1;

/// Per-category histogram of uncertainty values. Category index is
/// `(pred << 1) | gt`: 0 = TN, 1 = FN, 2 = FP, 3 = TP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionHistogram {
    counts: [[u64; BUCKETS]; 4],
}

impl Default for ConfusionHistogram {
    fn default() -> Self {
        Self {
            counts: [[0; BUCKETS]; 4],
        }
    }
}

impl ConfusionHistogram {
    pub fn build(pred: &BinaryMask, gt: &BinaryMask, unc: &UncertaintyMap) -> Result<Self> {
        check_dims(pred, gt, unc)?;
        let mut h = Self::default();
        for ((&p, &g), &u) in pred.bits().iter().zip(gt.bits()).zip(unc.voxels()) {
            h.counts[((p as usize) << 1) | g as usize][u as usize] += 1;
        }
        Ok(h)
    }

    /// Adds another histogram's counts (exact, order-independent).
    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Reads the confusion counts at every grid point from prefix sums.
    pub fn sweep(&self, grid: &ThresholdGrid) -> Vec<ConfusionAtTau> {
        // below[cat][t] = count with uncertainty < t, for t in 0..=101
        let mut below = [[0u64; BUCKETS + 1]; 4];
        for (cat, hist) in self.counts.iter().enumerate() {
            for u in 0..BUCKETS {
                below[cat][u + 1] = below[cat][u] + hist[u];
            }
        }
        grid.taus()
            .iter()
            .map(|&tau| {
                let t = if tau == MAX_UNCERTAINTY {
                    BUCKETS
                } else {
                    tau as usize
                };
                ConfusionAtTau::from_counts(tau, below[3][t], below[2][t], below[0][t], below[1][t])
            })
            .collect()
    }
}

/// One confusion entry per grid point, ascending in `tau`, computed in a
/// single pass over the voxels.
pub fn sweep(
    pred: &BinaryMask,
    gt: &BinaryMask,
    unc: &UncertaintyMap,
    grid: &ThresholdGrid,
) -> Result<Vec<ConfusionAtTau>> {
    Ok(ConfusionHistogram::build(pred, gt, unc)?.sweep(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(bits: &[bool]) -> BinaryMask {
        BinaryMask::from_bits([bits.len(), 1, 1], "t", bits.to_vec()).unwrap()
    }

    fn unc(v: &[u8]) -> UncertaintyMap {
        UncertaintyMap::new([v.len(), 1, 1], "t", v.to_vec()).unwrap()
    }

    const T: bool = true;
    const F: bool = false;

    #[test]
    fn baseline_counts_everything() {
        let c = confusion_at_tau(
            &mask(&[T, T, F, F]),
            &mask(&[T, F, F, T]),
            &unc(&[0; 4]),
            100,
        )
        .unwrap();
        assert_eq!(c, ConfusionAtTau::from_counts(100, 1, 1, 1, 1));
        assert_eq!(c.retained, 4);
    }

    #[test]
    fn half_threshold_keeps_certain_voxels() {
        let c = confusion_at_tau(
            &mask(&[T, T, F, F]),
            &mask(&[T, F, F, T]),
            &unc(&[10, 90, 10, 90]),
            50,
        )
        .unwrap();
        assert_eq!(c, ConfusionAtTau::from_counts(50, 1, 0, 1, 0));
    }

    #[test]
    fn baseline_retains_maximal_uncertainty() {
        let c = confusion_at_tau(&mask(&[T, F]), &mask(&[T, F]), &unc(&[100, 100]), 100).unwrap();
        assert_eq!(c.retained, 2);
        let c = confusion_at_tau(&mask(&[T, F]), &mask(&[T, F]), &unc(&[99, 99]), 99).unwrap();
        assert_eq!(c.retained, 0);
    }

    #[test]
    fn zero_threshold_retains_nothing() {
        let g = ThresholdGrid::new(vec![0, 100]).unwrap();
        let s = sweep(&mask(&[T, F]), &mask(&[T, T]), &unc(&[0, 0]), &g).unwrap();
        assert_eq!(s[0], ConfusionAtTau::from_counts(0, 0, 0, 0, 0));
        assert_eq!(s[1], ConfusionAtTau::from_counts(100, 1, 0, 0, 1));
    }

    #[test]
    fn all_certain_map_is_flat_above_zero() {
        let g = ThresholdGrid::new(vec![5, 25, 50, 100]).unwrap();
        let s = sweep(&mask(&[T, F, T]), &mask(&[T, T, F]), &unc(&[0, 0, 0]), &g).unwrap();
        for e in &s {
            assert_eq!((e.tp, e.fp, e.tn, e.fn_), (1, 1, 0, 1));
        }
    }

    #[test]
    fn sweep_shape() {
        let s = sweep(
            &mask(&[T, F]),
            &mask(&[T, F]),
            &unc(&[30, 60]),
            &ThresholdGrid::quarters(),
        )
        .unwrap();
        assert_eq!(
            s.iter().map(|c| c.tau).collect::<Vec<_>>(),
            vec![25, 50, 75, 100]
        );
    }

    #[test]
    fn dim_mismatch() {
        let err = confusion_at_tau(&mask(&[T, F]), &mask(&[T]), &unc(&[0, 0]), 50);
        assert!(matches!(err, Err(Error::DimMismatch { .. })));
        let err = sweep(
            &mask(&[T]),
            &mask(&[T]),
            &unc(&[0, 0]),
            &ThresholdGrid::default(),
        );
        assert!(matches!(err, Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(ThresholdGrid::new(vec![100]).is_err());
        assert!(ThresholdGrid::new(vec![50, 50, 100]).is_err());
        assert!(ThresholdGrid::new(vec![75, 50, 100]).is_err());
        assert!(ThresholdGrid::new(vec![25, 50]).is_err());
        assert!(ThresholdGrid::new(vec![25, 101]).is_err());
        assert!("25, 50,75,100".parse::<ThresholdGrid>().is_ok());
        assert!("25,x,100".parse::<ThresholdGrid>().is_err());
        let d = ThresholdGrid::default();
        assert_eq!(d.len(), 21);
        assert_eq!(d.taus()[0], 0);
        assert_eq!(d.to_string().parse::<ThresholdGrid>().unwrap(), d);
        assert!(serde_json::from_str::<ThresholdGrid>("[50,40,100]").is_err());
    }

    #[test]
    fn merged_histograms_match_whole() {
        let p = [T, F, T, T, F, F];
        let g = [T, T, F, T, F, T];
        let u = [3, 40, 77, 100, 0, 55];
        let whole = ConfusionHistogram::build(&mask(&p), &mask(&g), &unc(&u)).unwrap();
        let mut a =
            ConfusionHistogram::build(&mask(&p[..2]), &mask(&g[..2]), &unc(&u[..2])).unwrap();
        let b = ConfusionHistogram::build(&mask(&p[2..]), &mask(&g[2..]), &unc(&u[2..])).unwrap();
        a.merge(&b);
        assert_eq!(a, whole);
    }

    fn case_strategy() -> impl Strategy<Value = (Vec<bool>, Vec<bool>, Vec<u8>)> {
        (1usize..300).prop_flat_map(|n| {
            (
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(0u8..=100, n),
            )
        })
    }

    fn grid_strategy() -> impl Strategy<Value = ThresholdGrid> {
        prop::collection::btree_set(0u8..100, 1..12).prop_map(|s| {
            let mut v: Vec<u8> = s.into_iter().collect();
            v.push(100);
            ThresholdGrid::new(v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sweep_matches_pointwise((p, g, u) in case_strategy(), grid in grid_strategy()) {
            let (p, g, u) = (mask(&p), mask(&g), unc(&u));
            let s = sweep(&p, &g, &u, &grid).unwrap();
            for (entry, &tau) in s.iter().zip(grid.taus()) {
                prop_assert_eq!(*entry, confusion_at_tau(&p, &g, &u, tau).unwrap());
            }
        }

        #[test]
        fn counts_monotone_and_partitioned((p, g, u) in case_strategy(), grid in grid_strategy()) {
            let n = p.len() as u64;
            let s = sweep(&mask(&p), &mask(&g), &unc(&u), &grid).unwrap();
            for e in &s {
                prop_assert_eq!(e.tp + e.fp + e.tn + e.fn_, e.retained);
                prop_assert!(e.retained <= n);
            }
            prop_assert_eq!(s.last().unwrap().retained, n);
            for w in s.windows(2) {
                prop_assert!(w[0].retained <= w[1].retained);
                prop_assert!(w[0].tp <= w[1].tp);
                prop_assert!(w[0].fp <= w[1].fp);
                prop_assert!(w[0].tn <= w[1].tn);
                prop_assert!(w[0].fn_ <= w[1].fn_);
            }
        }
    }
}
