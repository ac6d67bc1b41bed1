#![allow(dead_code)]

use std::path::{Path, PathBuf};

use uqseg::synth::realize_sweep;
use uqseg::volio::{payload_path_for, write_raw_volume};
use uqseg::{BinaryMask, ConfusionAtTau, UncertaintyMap, Volume};

/// Tabulated curves for the two worked examples at tau = 0.25, 0.50, 0.75,
/// 1.00 (ascending).
pub struct TabulatedExample {
    pub name: &'static str,
    pub dice: [f64; 4],
    pub ftp: [f64; 4],
    pub ftn: [f64; 4],
    /// TP, TN and FP+FN counts per threshold, chosen so the curves above are
    /// reproduced to four decimals (TP base 10 000, TN base 1 000 000).
    pub tp: [u64; 4],
    pub tn: [u64; 4],
    pub errors: [u64; 4],
}

pub const EXAMPLES: [TabulatedExample; 2] = [
    TabulatedExample {
        name: "example-1",
        dice: [0.97, 0.965, 0.96, 0.94],
        ftp: [0.1, 0.05, 0.0, 0.0],
        ftn: [0.0019, 0.0016, 0.0015, 0.0],
        tp: [9_000, 9_500, 10_000, 10_000],
        tn: [998_100, 998_400, 998_500, 1_000_000],
        errors: [557, 689, 833, 1_277],
    },
    TabulatedExample {
        name: "example-2",
        dice: [0.975, 0.97, 0.955, 0.92],
        ftp: [0.25, 0.15, 0.0, 0.0],
        ftn: [0.0096, 0.0026, 0.0015, 0.0],
        tp: [7_500, 8_500, 10_000, 10_000],
        tn: [990_400, 997_400, 998_500, 1_000_000],
        errors: [385, 526, 942, 1_739],
    },
];

impl TabulatedExample {
    pub fn targets(&self) -> Vec<ConfusionAtTau> {
        [25u8, 50, 75, 100]
            .iter()
            .enumerate()
            .map(|(i, &tau)| {
                let e = self.errors[i];
                ConfusionAtTau::from_counts(tau, self.tp[i], e.div_ceil(2), self.tn[i], e / 2)
            })
            .collect()
    }

    pub fn volumes(&self) -> (BinaryMask, BinaryMask, UncertaintyMap) {
        realize_sweep(&self.targets(), self.name).unwrap()
    }
}

/// Writes a mask as a raw label volume (label 4 where set) and returns the
/// header path.
pub fn write_mask(dir: &Path, name: &str, mask: &BinaryMask) -> PathBuf {
    let h = dir.join(format!("{name}.json"));
    write_raw_volume(
        &Volume::Label(mask.to_labels(4).unwrap()),
        &h,
        &payload_path_for(&h),
    )
    .unwrap();
    h
}

pub fn write_unc(dir: &Path, name: &str, unc: &UncertaintyMap) -> PathBuf {
    let h = dir.join(format!("{name}.json"));
    write_raw_volume(&Volume::Uncertainty(unc.clone()), &h, &payload_path_for(&h)).unwrap();
    h
}

/// Writes the worked-example fixtures into `dir` and returns a manifest
/// path (method `fixture`).
pub fn write_tabulated_fixtures(dir: &Path) -> PathBuf {
    let mut manifest = String::from("case_id,method,gt,pred,unc\n");
    for ex in &EXAMPLES {
        let (pred, gt, unc) = ex.volumes();
        write_mask(dir, &format!("{}_gt", ex.name), &gt);
        write_mask(dir, &format!("{}_pred", ex.name), &pred);
        write_unc(dir, &format!("{}_unc", ex.name), &unc);
        manifest.push_str(&format!(
            "{0},fixture,{0}_gt.json,{0}_pred.json,{0}_unc.json\n",
            ex.name
        ));
    }
    let p = dir.join("manifest.csv");
    std::fs::write(&p, manifest).unwrap();
    p
}

pub fn run(args: &[&str]) -> i32 {
    let mut full = vec!["uqseg"];
    full.extend_from_slice(args);
    uqseg::cli::run(full)
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
