//! Report files: evaluation curves + summaries, and rank tables.
//!
//! CSV evaluation reports hold two row kinds in one table. `curve` rows fill
//! `tau, dice, ftp, ftn` (written from `tau = 100` downwards); the `summary`
//! row that follows each record fills `auc_dice, auc_ftp, auc_ftn, score`.
//! JSON reports serialize the full records.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{require_file, write_atomic};
use crate::error::{Error, Result};
use crate::pipeline::EvaluationRecord;
use crate::regions::Region;
use crate::report::{CaseScore, RankTable};
use crate::scoring::UnifiedScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` means JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            ReportFormat::Json
        } else {
            ReportFormat::Csv
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Curve,
    Summary,
}

/// One line of a CSV evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: RowKind,
    pub case_id: String,
    pub region: Region,
    pub method: String,
    pub tau: Option<u8>,
    pub dice: Option<f64>,
    pub ftp: Option<f64>,
    pub ftn: Option<f64>,
    pub auc_dice: Option<f64>,
    pub auc_ftp: Option<f64>,
    pub auc_ftn: Option<f64>,
    pub score: Option<f64>,
}

impl ReportRow {
    fn rows_for(r: &EvaluationRecord) -> impl Iterator<Item = ReportRow> + '_ {
        let base = ReportRow {
            kind: RowKind::Curve,
            case_id: r.case_id.clone(),
            region: r.region,
            method: r.method.clone(),
            tau: None,
            dice: None,
            ftp: None,
            ftn: None,
            auc_dice: None,
            auc_ftp: None,
            auc_ftn: None,
            score: None,
        };
        let summary = ReportRow {
            kind: RowKind::Summary,
            auc_dice: Some(r.score.auc_dice),
            auc_ftp: Some(r.score.auc_ftp),
            auc_ftn: Some(r.score.auc_ftn),
            score: Some(r.score.score),
            ..base.clone()
        };
        r.curves
            .descending()
            .map(move |p| ReportRow {
                tau: Some(p.tau),
                dice: Some(p.dice),
                ftp: Some(p.ftp),
                ftn: Some(p.ftn),
                ..base.clone()
            })
            .chain(std::iter::once(summary))
    }
}

pub fn write_report(records: &[EvaluationRecord], format: ReportFormat, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Empty("no evaluation records to write"));
    }
    let bytes = match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(records)?;
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                for row in ReportRow::rows_for(r) {
                    w.serialize(row)?;
                }
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
    };
    write_atomic(path, &bytes)
}

/// Reads back a JSON evaluation report.
pub fn read_report(path: &Path) -> Result<Vec<EvaluationRecord>> {
    require_file(path)?;
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    #[serde(default)]
    kind: Option<RowKind>,
    case_id: String,
    region: Region,
    method: String,
    auc_dice: Option<f64>,
    auc_ftp: Option<f64>,
    auc_ftn: Option<f64>,
    score: Option<f64>,
}

/// Per-case scores from an evaluation report: either a JSON report, or a CSV
/// with summary columns (rows of kind `curve` are skipped).
pub fn read_case_scores(path: &Path) -> Result<Vec<CaseScore>> {
    require_file(path)?;
    if ReportFormat::from_path(path) == ReportFormat::Json {
        return Ok(read_report(path)?.iter().map(CaseScore::from).collect());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (line, row) in rdr.deserialize::<ScoreRow>().enumerate() {
        let row = row?;
        if row.kind == Some(RowKind::Curve) {
            continue;
        }
        let (Some(auc_dice), Some(auc_ftp), Some(auc_ftn), Some(score)) =
            (row.auc_dice, row.auc_ftp, row.auc_ftn, row.score)
        else {
            return Err(Error::InvalidArgument(format!(
                "{}: summary row {} lacks score columns",
                path.display(),
                line + 2
            )));
        };
        out.push(CaseScore {
            case_id: row.case_id,
            region: row.region,
            method: row.method,
            score: UnifiedScore {
                auc_dice,
                auc_ftp,
                auc_ftn,
                score,
            },
        });
    }
    if out.is_empty() {
        return Err(Error::Empty("score file has no summary rows"));
    }
    Ok(out)
}

/// Writes a rank table. CSV columns are `method`, then `<R>_score`,
/// `<R>_rank`, `<R>_tied` per region, then `overall_score`, `overall_rank`,
/// `overall_tied`.
pub fn write_rank_table(table: &RankTable, format: ReportFormat, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::Empty("rank table has no rows"));
    }
    let bytes = match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(table)?;
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["method".to_string()];
            for r in &table.regions {
                header.extend([
                    format!("{r}_score"),
                    format!("{r}_rank"),
                    format!("{r}_tied"),
                ]);
            }
            header.extend(["overall_score", "overall_rank", "overall_tied"].map(String::from));
            w.write_record(&header)?;
            for row in &table.rows {
                let mut rec = vec![row.method.clone()];
                for c in &row.cells {
                    rec.extend([
                        c.mean_score.to_string(),
                        c.rank.to_string(),
                        c.tied.to_string(),
                    ]);
                }
                rec.extend([
                    row.overall_score.to_string(),
                    row.overall_rank.to_string(),
                    row.overall_tied.to_string(),
                ]);
                w.write_record(&rec)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?
        }
    };
    write_atomic(path, &bytes)
}

pub fn read_rank_table(path: &Path) -> Result<RankTable> {
    require_file(path)?;
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
