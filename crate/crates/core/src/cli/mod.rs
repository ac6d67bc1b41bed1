//! The `uqseg` command line: `evaluate`, `measure`, `synth` and `rank`.
//!
//! Exit status is 0 on success, 1 for bad input (missing files, malformed
//! volumes, invalid arguments) and 2 when an internal invariant is violated.
//! Every global flag can also be set through a `UQSEG_`-prefixed environment
//! variable.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::filtering::ThresholdGrid;
use crate::measures::{measure, MeasureKind};
use crate::pipeline::{evaluate_manifest, read_manifest, ManifestRow};
use crate::regions::Region;
use crate::report::{aggregate, rank_table};
use crate::synth::{generate, write_triple, SynthSpec};
use crate::volio::{
    is_nifti_path, load_volume, payload_path_for, read_case_scores, write_atomic,
    write_nifti_volume, write_rank_table, write_raw_volume, write_report, NiftiDatatype,
    ReportFormat, Volume, VoxelKind,
};

#[derive(Debug, Parser)]
#[command(
    name = "uqseg",
    version,
    about = "Score and rank voxel-wise uncertainty maps for tumour segmentation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Comma-separated thresholds on the 0-100 scale; must end with 100.
    #[arg(long, global = true, env = "UQSEG_GRID")]
    pub grid: Option<ThresholdGrid>,

    /// Comma-separated subset of WT,TC,ET.
    #[arg(long, global = true, env = "UQSEG_REGIONS", value_delimiter = ',')]
    pub regions: Option<Vec<Region>>,

    /// Output format; inferred from the output extension when omitted.
    #[arg(long, global = true, env = "UQSEG_FORMAT")]
    pub format: Option<ReportFormat>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "UQSEG_WORKERS")]
    pub workers: Option<usize>,

    /// Overrides the seed in a synth spec.
    #[arg(long, global = true, env = "UQSEG_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep thresholds over every manifest row and region; write curves and scores.
    Evaluate {
        /// CSV or JSON manifest (case_id, method, gt, pred, unc[, unc_wt, unc_tc, unc_et]).
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON config with any of: grid, regions, manifest, out, format, workers.
        #[arg(long, env = "UQSEG_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Compute an uncertainty map from a probability stack.
    Measure {
        /// entropy, variance or mi.
        #[arg(long)]
        kind: MeasureKind,
        /// Raw header of the probability stack.
        #[arg(long)]
        stack: PathBuf,
        /// Output path: `.nii`/`.nii.gz` for NIfTI, otherwise a raw header.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic (gt, pred, unc) triple from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Aggregate per-case scores and rank methods per region.
    Rank {
        /// Evaluation report (CSV or JSON).
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Fully resolved settings for `evaluate`.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub grid: ThresholdGrid,
    pub regions: Vec<Region>,
    pub manifest: Vec<ManifestRow>,
    pub output: PathBuf,
    pub format: ReportFormat,
    pub workers: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalConfigFile {
    grid: Option<ThresholdGrid>,
    regions: Option<Vec<Region>>,
    manifest: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<ReportFormat>,
    workers: Option<usize>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl EvalConfig {
    /// Merges a config file (if any) with command-line flags; flags win.
    pub fn resolve(
        global: &GlobalArgs,
        manifest: Option<&Path>,
        out: Option<&Path>,
        config: Option<&Path>,
    ) -> Result<Self> {
        let (file, base) = match config {
            Some(p) => {
                if !p.is_file() {
                    return Err(Error::MissingFile(p.to_path_buf()));
                }
                let text = std::fs::read_to_string(p)?;
                let file: EvalConfigFile = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))?;
                (file, p.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (EvalConfigFile::default(), PathBuf::new()),
        };
        let relative = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };

        let manifest_path = manifest
            .map(Path::to_path_buf)
            .or(file.manifest.map(relative))
            .ok_or_else(|| Error::InvalidArgument("evaluate needs --manifest".into()))?;
        let output = out
            .map(Path::to_path_buf)
            .or(file.out.map(relative))
            .ok_or_else(|| Error::InvalidArgument("evaluate needs --out".into()))?;
        let mut regions = global
            .regions
            .clone()
            .or(file.regions)
            .unwrap_or_else(|| Region::ALL.to_vec());
        regions.sort();
        regions.dedup();
        Ok(Self {
            grid: global.grid.clone().or(file.grid).unwrap_or_default(),
            regions,
            manifest: read_manifest(&manifest_path)?,
            format: global
                .format
                .or(file.format)
                .unwrap_or_else(|| ReportFormat::from_path(&output)),
            workers: global
                .workers
                .or(file.workers)
                .unwrap_or_else(default_workers),
            output,
        })
    }
}

pub fn cmd_evaluate(config: &EvalConfig) -> Result<usize> {
    let records = evaluate_manifest(
        &config.manifest,
        &config.regions,
        &config.grid,
        config.workers,
    )?;
    write_report(&records, config.format, &config.output)?;
    Ok(records.len())
}

pub fn cmd_measure(kind: MeasureKind, stack: &Path, out: &Path) -> Result<()> {
    let stack = load_volume(stack, VoxelKind::Probability)?.into_probability()?;
    let map = Volume::Uncertainty(measure(kind, &stack)?);
    if is_nifti_path(out) {
        write_nifti_volume(&map, out, NiftiDatatype::Uint8)
    } else {
        write_raw_volume(&map, out, &payload_path_for(out))
    }
}

/// Writes the triple, `expected.json` and a one-row `manifest.csv` into
/// `out_dir`.
pub fn cmd_synth(spec_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<()> {
    if !spec_path.is_file() {
        return Err(Error::MissingFile(spec_path.to_path_buf()));
    }
    let mut spec: SynthSpec = serde_json::from_str(&std::fs::read_to_string(spec_path)?)
        .map_err(|e| Error::SpecInvalid(e.to_string()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let volumes = generate(&spec)?;
    write_triple(&volumes, out_dir)?;
    let manifest = format!(
        "case_id,method,gt,pred,unc\n{},synth,gt.json,pred.json,unc.json\n",
        spec.case_id
    );
    write_atomic(&out_dir.join("manifest.csv"), manifest.as_bytes())
}

pub fn cmd_rank(scores: &Path, out: &Path, format: ReportFormat) -> Result<()> {
    let scores = read_case_scores(scores)?;
    let table = rank_table(&aggregate(&scores)?)?;
    write_rank_table(&table, format, out)
}

fn dispatch(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Evaluate {
            manifest,
            out,
            config,
        } => {
            let cfg =
                EvalConfig::resolve(g, manifest.as_deref(), out.as_deref(), config.as_deref())?;
            let n = cmd_evaluate(&cfg)?;
            println!("wrote {n} records to {}", cfg.output.display());
        }
        Command::Measure { kind, stack, out } => {
            cmd_measure(*kind, stack, out)?;
            println!("wrote {kind} map to {}", out.display());
        }
        Command::Synth { spec, out_dir } => {
            cmd_synth(spec, out_dir, g.seed)?;
            println!("wrote synthetic case to {}", out_dir.display());
        }
        Command::Rank { scores, out } => {
            let format = g.format.unwrap_or_else(|| ReportFormat::from_path(out));
            cmd_rank(scores, out, format)?;
            println!("wrote rank table to {}", out.display());
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
