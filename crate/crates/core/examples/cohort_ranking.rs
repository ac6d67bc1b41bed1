//! Ranking methods over a cohort.
//!
//! Three made-up uncertainty methods are scored on the same 12 synthetic
//! segmentations. They differ only in which voxels they flag as uncertain.
//!
//!     cargo run --example cohort_ranking

use uqseg::pipeline::evaluate_region;
use uqseg::report::{aggregate, rank_table, CaseScore};
use uqseg::synth::{generate, PerCategory, SynthSpec, UncRange, SYNTH_LABEL};
use uqseg::{Region, ThresholdGrid};

/// Uncertain share of TP, FP, TN and FN voxels.
const METHODS: [(&str, [f64; 4]); 3] = [
    ("ensemble", [0.05, 0.85, 0.01, 0.85]),
    ("dropout", [0.15, 0.6, 0.05, 0.6]),
    ("softmax", [0.02, 0.2, 0.0, 0.2]),
];

fn main() -> uqseg::Result<()> {
    let grid = ThresholdGrid::default();
    let mut scores = Vec::new();
    for case in 0..12u64 {
        let (tp, fp, fn_) = (0.12 + 0.01 * case as f64, 0.03, 0.02 + 0.002 * case as f64);
        let tn = 1.0 - tp - fp - fn_;
        for (m, (name, s)) in METHODS.iter().enumerate() {
            let spec = SynthSpec {
                dims: [16, 16, 8],
                fractions: PerCategory::from_array([
                    tp * (1.0 - s[0]),
                    tp * s[0],
                    fp * (1.0 - s[1]),
                    fp * s[1],
                    tn * (1.0 - s[2]),
                    tn * s[2],
                    fn_ * (1.0 - s[3]),
                    fn_ * s[3],
                ]),
                confident_range: UncRange::new(0, 25),
                uncertain_range: UncRange::new(50, 100),
                seed: case * 31 + m as u64,
                case_id: format!("case-{case:02}"),
            };
            let v = generate(&spec)?;
            let gt = v.gt.to_labels(SYNTH_LABEL)?;
            let pred = v.pred.to_labels(SYNTH_LABEL)?;
            for region in Region::ALL {
                let r = evaluate_region(&spec.case_id, name, &gt, &pred, &v.unc, region, &grid)?;
                scores.push(CaseScore::from(&r));
            }
        }
    }

    let table = rank_table(&aggregate(&scores)?)?;
    print!("{:<10}", "method");
    for r in &table.regions {
        print!("{:>14}", r.as_str());
    }
    println!("{:>14}", "overall");
    for row in &table.rows {
        print!("{:<10}", row.method);
        for c in &row.cells {
            print!("{:>10.4} ({})", c.mean_score, c.rank);
        }
        println!("{:>10.4} ({})", row.overall_score, row.overall_rank);
    }
    Ok(())
}
