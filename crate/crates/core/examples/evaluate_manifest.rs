//! The file-based workflow: synthesize a small cohort on disk, evaluate it
//! from a manifest, write the CSV report and a rank table.
//!
//!     cargo run --example evaluate_manifest

use uqseg::cli::{cmd_evaluate, cmd_rank, cmd_synth, EvalConfig, GlobalArgs};
use uqseg::volio::ReportFormat;

fn main() -> uqseg::Result<()> {
    let dir = tempfile::tempdir()?;
    let mut manifest = String::from("case_id,method,gt,pred,unc\n");
    for (method, lo) in [("sharp", 70), ("blurry", 35)] {
        for case in 0..3 {
            let spec = format!(
                r#"{{"dims": [20, 20, 10],
                    "fractions": {{"tp_confident": 0.2, "tp_uncertain": 0.03, "fp_uncertain": 0.04,
                                   "tn_confident": 0.68, "fn_confident": 0.01, "fn_uncertain": 0.04}},
                    "confident_range": [0, 30], "uncertain_range": [{lo}, 100],
                    "seed": {case}, "case_id": "case-{case}"}}"#
            );
            let sub = dir.path().join(format!("{method}-{case}"));
            std::fs::create_dir_all(&sub)?;
            std::fs::write(sub.join("spec.json"), spec)?;
            cmd_synth(&sub.join("spec.json"), &sub, None)?;
            let rel = sub.file_name().unwrap().to_string_lossy().into_owned();
            manifest.push_str(&format!(
                "case-{case},{method},{rel}/gt.json,{rel}/pred.json,{rel}/unc.json\n"
            ));
        }
    }
    let manifest_path = dir.path().join("manifest.csv");
    std::fs::write(&manifest_path, manifest)?;

    let global = GlobalArgs {
        grid: Some("0,25,50,75,100".parse()?),
        regions: None,
        format: None,
        workers: Some(2),
        seed: None,
    };
    let report = dir.path().join("report.csv");
    let config = EvalConfig::resolve(&global, Some(&manifest_path), Some(&report), None)?;
    let n = cmd_evaluate(&config)?;
    println!("{n} records; first lines of the report:");
    for line in std::fs::read_to_string(&report)?.lines().take(7) {
        println!("  {line}");
    }

    let ranks = dir.path().join("ranks.csv");
    cmd_rank(&report, &ranks, ReportFormat::Csv)?;
    println!("\nrank table:");
    print!("{}", std::fs::read_to_string(&ranks)?);
    Ok(())
}
