//! Dice / FTP / FTN curves over a threshold sweep, their areas, and the
//! unified score that combines them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::ConfusionAtTau;
use crate::volio::MAX_UNCERTAINTY;

/// Dice on retained voxels. An empty prediction against an empty ground
/// truth scores 1.
pub fn dice(c: &ConfusionAtTau) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        1.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}

fn filtered_ratio(at_tau: u64, base: u64) -> f64 {
    if base == 0 {
        0.0
    } else {
        base.saturating_sub(at_tau) as f64 / base as f64
    }
}

/// Fraction of baseline true positives removed by filtering.
pub fn ftp_ratio(c_tau: &ConfusionAtTau, c_base: &ConfusionAtTau) -> f64 {
    filtered_ratio(c_tau.tp, c_base.tp)
}

/// Fraction of baseline true negatives removed by filtering.
pub fn ftn_ratio(c_tau: &ConfusionAtTau, c_base: &ConfusionAtTau) -> f64 {
    filtered_ratio(c_tau.tn, c_base.tn)
}

/// The three curves for one (case, region, method), stored ascending in
/// `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub taus: Vec<u8>,
    pub dice: Vec<f64>,
    pub ftp: Vec<f64>,
    pub ftn: Vec<f64>,
}

/// One curve point, as written to reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub tau: u8,
    pub dice: f64,
    pub ftp: f64,
    pub ftn: f64,
}

impl CurveSet {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn point(&self, i: usize) -> CurvePoint {
        CurvePoint {
            tau: self.taus[i],
            dice: self.dice[i],
            ftp: self.ftp[i],
            ftn: self.ftn[i],
        }
    }

    /// Points from `tau = 100` down to the smallest threshold, the order
    /// used for human-readable tables.
    pub fn descending(&self) -> impl Iterator<Item = CurvePoint> + '_ {
        (0..self.len()).rev().map(|i| self.point(i))
    }
}

/// Builds the curves from an ascending sweep whose last entry is the
/// `tau = 100` baseline.
pub fn curve_set(sweep: &[ConfusionAtTau]) -> Result<CurveSet> {
    let base = match sweep.last() {
        Some(b) if b.tau == MAX_UNCERTAINTY => *b,
        _ => return Err(Error::MissingBaseline),
    };
    if sweep.len() < 2 {
        return Err(Error::InvalidGrid(
            "a sweep needs at least 2 thresholds".into(),
        ));
    }
    if sweep.windows(2).any(|w| w[0].tau >= w[1].tau) {
        return Err(Error::InvalidGrid(
            "sweep thresholds must be strictly increasing".into(),
        ));
    }
    Ok(CurveSet {
        taus: sweep.iter().map(|c| c.tau).collect(),
        dice: sweep.iter().map(dice).collect(),
        ftp: sweep.iter().map(|c| ftp_ratio(c, &base)).collect(),
        ftn: sweep.iter().map(|c| ftn_ratio(c, &base)).collect(),
    })
}

/// Composite-trapezoid area under `values` over `taus / 100`, divided by the
/// grid span so that a constant curve integrates to its value.
pub fn auc(taus: &[u8], values: &[f64]) -> f64 {
    assert_eq!(taus.len(), values.len(), "curve length differs from grid");
    assert!(taus.len() >= 2, "need at least two points");
    let span = (taus[taus.len() - 1] - taus[0]) as f64 / 100.0;
    let area: f64 = taus
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (t[1] - t[0]) as f64 / 100.0 * (v[0] + v[1]) / 2.0)
        .sum();
    (area / span).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnifiedScore {
    pub auc_dice: f64,
    pub auc_ftp: f64,
    pub auc_ftn: f64,
    pub score: f64,
}

impl UnifiedScore {
    pub fn from_aucs(auc_dice: f64, auc_ftp: f64, auc_ftn: f64) -> Self {
        Self {
            auc_dice,
            auc_ftp,
            auc_ftn,
            score: (auc_dice + (1.0 - auc_ftp) + (1.0 - auc_ftn)) / 3.0,
        }
    }
}

/// Rewards a high Dice curve and penalises filtering away correct voxels.
pub fn unified_score(cs: &CurveSet) -> UnifiedScore {
    UnifiedScore::from_aucs(
        auc(&cs.taus, &cs.dice),
        auc(&cs.taus, &cs.ftp),
        auc(&cs.taus, &cs.ftn),
    )
}
