//! Two hand-built cases scored on the quarter grid (0.25, 0.50, 0.75, 1.00).
//!
//! Both cases have the same baseline Dice ambitions but spend their
//! uncertainty differently: the first filters mostly errors, the second also
//! gives up a quarter of its true positives at the lowest threshold.
//!
//!     cargo run --example worked_examples

use uqseg::synth::realize_sweep;
use uqseg::{curve_set, sweep, unified_score, ConfusionAtTau, ThresholdGrid};

fn counts(tp: [u64; 4], tn: [u64; 4], errors: [u64; 4]) -> Vec<ConfusionAtTau> {
    [25u8, 50, 75, 100]
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            ConfusionAtTau::from_counts(tau, tp[i], errors[i].div_ceil(2), tn[i], errors[i] / 2)
        })
        .collect()
}

fn main() -> uqseg::Result<()> {
    let cases = [
        (
            "example-1",
            counts(
                [9_000, 9_500, 10_000, 10_000],
                [998_100, 998_400, 998_500, 1_000_000],
                [557, 689, 833, 1_277],
            ),
        ),
        (
            "example-2",
            counts(
                [7_500, 8_500, 10_000, 10_000],
                [990_400, 997_400, 998_500, 1_000_000],
                [385, 526, 942, 1_739],
            ),
        ),
    ];
    let grid = ThresholdGrid::quarters();
    for (name, targets) in cases {
        // voxels whose sweep reproduces the target counts exactly
        let (pred, gt, unc) = realize_sweep(&targets, name)?;
        let cs = curve_set(&sweep(&pred, &gt, &unc, &grid)?)?;
        let score = unified_score(&cs);

        println!("{name} ({} voxels)", unc.voxels().len());
        println!("  tau    dice    ftp     ftn");
        for p in cs.descending() {
            println!(
                "  {:.2}   {:.4}  {:.4}  {:.4}",
                p.tau as f64 / 100.0,
                p.dice,
                p.ftp,
                p.ftn
            );
        }
        println!(
            "  auc dice {:.4}  auc ftp {:.4}  auc ftn {:.4}  score {:.4}\n",
            score.auc_dice, score.auc_ftp, score.auc_ftn, score.score
        );
    }
    Ok(())
}
