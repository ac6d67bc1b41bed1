//! Scoring and ranking of voxel-wise uncertainty maps for multi-region
//! tumour segmentation.
//!
//! Uncertain voxels are filtered out at a sweep of thresholds; at each
//! threshold the Dice score of the retained voxels is measured together with
//! the fraction of true positives and true negatives that were filtered
//! away. The areas under the three curves combine into one unified score:
//!
//! ```text
//! score = (AUC_dice + (1 - AUC_ftp) + (1 - AUC_ftn)) / 3
//! ```
//!
//! A good uncertainty map is confident where the segmentation is right and
//! uncertain where it is wrong, so filtering raises Dice without discarding
//! many correct voxels.
//!
//! Module map:
//!
//! - [`volio`]: raw and NIfTI-1 volume IO, report files
//! - [`regions`]: WT / TC / ET masks from tumour labels {0, 1, 2, 4}
//! - [`filtering`]: threshold sweep and confusion counts
//! - [`scoring`]: curves, AUC, unified score
//! - [`measures`]: entropy / variance / mutual-information maps from sample stacks
//! - [`synth`]: synthetic cases with closed-form expected curves
//! - [`report`]: cohort aggregation and method ranking
//! - [`pipeline`]: manifest-driven evaluation
//! - [`cli`]: the `uqseg` command line
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod cli;
pub mod error;
pub mod filtering;
pub mod measures;
pub mod pipeline;
pub mod regions;
pub mod report;
pub mod scoring;
pub mod synth;
pub mod volio;

pub use error::{Error, Result};
pub use filtering::{confusion_at_tau, sweep, ConfusionAtTau, ThresholdGrid};
pub use regions::{derive_mask, BinaryMask, Region};
pub use scoring::{
    auc, curve_set, dice, ftn_ratio, ftp_ratio, unified_score, CurveSet, UnifiedScore,
};
pub use volio::{LabelVolume, ProbabilityStack, UncertaintyMap, Volume, VoxelKind};
