//! End-to-end evaluation of a manifest of cases.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::{sweep, ConfusionAtTau, ThresholdGrid};
use crate::regions::{derive_mask, Region};
use crate::scoring::{curve_set, unified_score, CurveSet, UnifiedScore};
use crate::volio::{load_volume, require_file, LabelVolume, UncertaintyMap, VoxelKind};

/// Everything computed for one (case, region, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub case_id: String,
    pub region: Region,
    pub method: String,
    pub sweep: Vec<ConfusionAtTau>,
    pub curves: CurveSet,
    pub score: UnifiedScore,
}

impl EvaluationRecord {
    fn sort_key(&self) -> (&str, Region, &str) {
        (&self.case_id, self.region, &self.method)
    }
}

/// One case submitted by one method. `unc` is used for every region unless
/// a region-specific map is given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub case_id: String,
    pub method: String,
    pub gt: PathBuf,
    pub pred: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unc: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unc_wt: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unc_tc: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unc_et: Option<PathBuf>,
}

impl ManifestRow {
    pub fn unc_for(&self, region: Region) -> Result<&Path> {
        let specific = match region {
            Region::WT => &self.unc_wt,
            Region::TC => &self.unc_tc,
            Region::ET => &self.unc_et,
        };
        specific.as_deref().or(self.unc.as_deref()).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "case `{}` method `{}` has no uncertainty map for {region}",
                self.case_id, self.method
            ))
        })
    }

    fn resolve(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.gt);
        fix(&mut self.pred);
        for p in [
            &mut self.unc,
            &mut self.unc_wt,
            &mut self.unc_tc,
            &mut self.unc_et,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self
    }

    fn paths(&self, regions: &[Region]) -> Result<Vec<&Path>> {
        let mut out = vec![self.gt.as_path(), self.pred.as_path()];
        for &r in regions {
            out.push(self.unc_for(r)?);
        }
        Ok(out)
    }
}

/// Reads a manifest from CSV (header row with the `ManifestRow` field names)
/// or JSON (an array of rows). Relative paths resolve against the manifest's
/// directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    require_file(path)?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let rows: Vec<ManifestRow> = if is_json {
        serde_json::from_str(&std::fs::read_to_string(path)?)?
    } else {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)?;
        rdr.deserialize().collect::<std::result::Result<_, _>>()?
    };
    if rows.is_empty() {
        return Err(Error::Empty("manifest has no rows"));
    }
    Ok(rows.into_iter().map(|r| r.resolve(&base)).collect())
}

/// Scores one uncertainty map against one (gt, pred) pair for one region.
pub fn evaluate_region(
    case_id: &str,
    method: &str,
    gt: &LabelVolume,
    pred: &LabelVolume,
    unc: &UncertaintyMap,
    region: Region,
    grid: &ThresholdGrid,
) -> Result<EvaluationRecord> {
    let gt_mask = derive_mask(gt, region);
    let pred_mask = derive_mask(pred, region);
    let sweep = sweep(&pred_mask, &gt_mask, unc, grid)?;
    let curves = curve_set(&sweep)?;
    let score = unified_score(&curves);
    let record = EvaluationRecord {
        case_id: case_id.to_string(),
        region,
        method: method.to_string(),
        sweep,
        curves,
        score,
    };
    check_invariants(&record, gt.header().voxel_count() as u64)?;
    Ok(record)
}

/// Post-conditions every record must satisfy; a failure here is a bug, not
/// bad input.
pub fn check_invariants(record: &EvaluationRecord, voxels: u64) -> Result<()> {
    let fail = |what: String| {
        Err(Error::Invariant(format!(
            "{} {} {}: {what}",
            record.case_id, record.region, record.method
        )))
    };
    for c in &record.sweep {
        if c.tp + c.fp + c.tn + c.fn_ != c.retained || c.retained > voxels {
            return fail(format!("confusion partition broken at tau {}", c.tau));
        }
    }
    if record.sweep.last().map(|c| c.retained) != Some(voxels) {
        return fail("baseline does not retain every voxel".into());
    }
    let cs = &record.curves;
    for w in 0..cs.len().saturating_sub(1) {
        if cs.ftp[w] < cs.ftp[w + 1] || cs.ftn[w] < cs.ftn[w + 1] {
            return fail("filtered ratios increase with tau".into());
        }
    }
    let s = &record.score;
    if !(0.0..=1.0).contains(&s.score) {
        return fail(format!("score {} outside [0, 1]", s.score));
    }
    Ok(())
}

fn evaluate_row(
    row: &ManifestRow,
    regions: &[Region],
    grid: &ThresholdGrid,
) -> Result<Vec<EvaluationRecord>> {
    let gt = load_volume(&row.gt, VoxelKind::Label)?.into_labels()?;
    let pred = load_volume(&row.pred, VoxelKind::Label)?.into_labels()?;
    if gt.dims() != pred.dims() {
        return Err(Error::DimMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    let mut maps: HashMap<&Path, UncertaintyMap> = HashMap::new();
    let mut out = Vec::with_capacity(regions.len());
    for &region in regions {
        let path = row.unc_for(region)?;
        if !maps.contains_key(path) {
            let unc = load_volume(path, VoxelKind::Uncertainty)?.into_uncertainty()?;
            maps.insert(path, unc);
        }
        out.push(evaluate_region(
            &row.case_id,
            &row.method,
            &gt,
            &pred,
            &maps[path],
            region,
            grid,
        )?);
    }
    Ok(out)
}

/// Evaluates every manifest row for every region on `workers` threads. The
/// result is sorted by (case, region, method) and does not depend on the
/// worker count; on failure the error of the earliest failing row is
/// returned.
pub fn evaluate_manifest(
    rows: &[ManifestRow],
    regions: &[Region],
    grid: &ThresholdGrid,
    workers: usize,
) -> Result<Vec<EvaluationRecord>> {
    if rows.is_empty() {
        return Err(Error::Empty("manifest has no rows"));
    }
    if regions.is_empty() {
        return Err(Error::Empty("no regions selected"));
    }
    for row in rows {
        for p in row.paths(regions)? {
            require_file(p)?;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let per_row: Vec<Result<Vec<EvaluationRecord>>> = pool.install(|| {
        rows.par_iter()
            .map(|row| evaluate_row(row, regions, grid))
            .collect()
    });
    let mut records = Vec::new();
    for r in per_row {
        records.extend(r?);
    }
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(records)
}
