//! Entropy, variance and mutual-information maps from a Monte-Carlo stack.
//!
//! A 16×16×1 toy slice with four classes: the left half is predicted with
//! confident, consistent samples; the right half gets noisier as x grows,
//! and the top rows have samples that disagree with each other.
//!
//!     cargo run --example uncertainty_measures

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uqseg::measures::{measure, MeasureKind};
use uqseg::ProbabilityStack;

const SIDE: usize = 16;
const CLASSES: usize = 4;
const SAMPLES: usize = 8;

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

fn main() -> uqseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let voxels = SIDE * SIDE;
    let mut data = vec![0f32; SAMPLES * CLASSES * voxels];
    for y in 0..SIDE {
        for x in 0..SIDE {
            let v = y * SIDE + x;
            let noise = if x < SIDE / 2 { 0.1 } else { x as f64 / 4.0 };
            for k in 0..SAMPLES {
                // disagreeing samples: each one favours a different class
                let favoured = if y < 4 { k % CLASSES } else { 1 };
                let logits: Vec<f64> = (0..CLASSES)
                    .map(|c| if c == favoured { 6.0 } else { 0.0 } + rng.gen_range(-noise..=noise))
                    .collect();
                for (c, p) in softmax(&logits).into_iter().enumerate() {
                    data[(k * CLASSES + c) * voxels + v] = p as f32;
                }
            }
        }
    }
    let stack = ProbabilityStack::new([SIDE, SIDE, 1], "toy", CLASSES, SAMPLES, data)?;

    for kind in [
        MeasureKind::Entropy,
        MeasureKind::Variance,
        MeasureKind::MutualInformation,
    ] {
        let map = measure(kind, &stack)?;
        println!("{kind}");
        for row in map.voxels().chunks(SIDE) {
            let line: Vec<String> = row.iter().map(|u| format!("{u:4}")).collect();
            println!(" {}", line.join(""));
        }
        println!();
    }
    Ok(())
}
