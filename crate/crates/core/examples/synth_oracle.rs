//! Synthetic cases with a known answer.
//!
//! The generator places each (outcome, confidence) category in its own
//! block and draws uncertainty from a per-category range, so the curves can
//! be predicted from the category counts alone. Moving mass between
//! categories then shows which way the score responds.
//!
//!     cargo run --example synth_oracle

use uqseg::synth::{generate, oracle_curves, PerCategory, SynthSpec, UncRange};
use uqseg::{curve_set, sweep, unified_score, ThresholdGrid};

fn score(spec: &SynthSpec, grid: &ThresholdGrid) -> uqseg::Result<f64> {
    let v = generate(spec)?;
    let measured = curve_set(&sweep(&v.pred, &v.gt, &v.unc, grid)?)?;
    let predicted = oracle_curves(
        &v.expected,
        spec.confident_range,
        spec.uncertain_range,
        grid,
    )?;
    assert_eq!(measured, predicted);
    Ok(unified_score(&measured).score)
}

fn main() -> uqseg::Result<()> {
    let base = SynthSpec {
        dims: [32, 32, 16],
        fractions: PerCategory {
            tp_confident: 0.25,
            tp_uncertain: 0.02,
            fp_confident: 0.15,
            fp_uncertain: 0.03,
            tn_confident: 0.48,
            tn_uncertain: 0.02,
            fn_confident: 0.02,
            fn_uncertain: 0.03,
        },
        confident_range: UncRange::new(0, 20),
        uncertain_range: UncRange::new(60, 100),
        seed: 2024,
        case_id: "synth".into(),
    };
    // thresholds that never cut through a range
    let grid = ThresholdGrid::new(vec![0, 21, 40, 60, 100])?;
    println!(
        "baseline                      score {:.4}",
        score(&base, &grid)?
    );

    let mut f = base.fractions;
    f.tp_confident -= 0.10;
    f.tp_uncertain += 0.10;
    let tp_moved = SynthSpec {
        fractions: f,
        ..base.clone()
    };
    println!(
        "10% of TP marked uncertain    score {:.4}  (filters correct voxels)",
        score(&tp_moved, &grid)?
    );

    let mut f = base.fractions;
    f.fp_confident -= 0.10;
    f.fp_uncertain += 0.10;
    let fp_moved = SynthSpec {
        fractions: f,
        ..base.clone()
    };
    println!(
        "10% of FP marked uncertain    score {:.4}  (filters errors)",
        score(&fp_moved, &grid)?
    );

    let splitting = ThresholdGrid::new(vec![10, 50, 100])?;
    let v = generate(&base)?;
    match oracle_curves(
        &v.expected,
        base.confident_range,
        base.uncertain_range,
        &splitting,
    ) {
        Ok(_) => unreachable!(),
        Err(e) => println!("grid 10,50,100 has no closed form: {e}"),
    }
    Ok(())
}
