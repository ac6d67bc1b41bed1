//! Writing and reading NIfTI-1 volumes.
//!
//!     cargo run --example nifti_roundtrip

use uqseg::volio::{load_volume, write_nifti_volume, NiftiDatatype};
use uqseg::{derive_mask, LabelVolume, Region, Volume, VoxelKind};

fn main() -> uqseg::Result<()> {
    let dir = tempfile::tempdir()?;
    let dims = [24, 24, 12];
    // concentric shells: edema (2) around necrosis (1) around enhancing (4)
    let mut labels = Vec::with_capacity(dims.iter().product());
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let d = ((x as f64 - 12.0).powi(2)
                    + (y as f64 - 12.0).powi(2)
                    + (2.0 * z as f64 - 12.0).powi(2))
                .sqrt();
                labels.push(match d {
                    d if d < 3.0 => 1,
                    d if d < 5.0 => 4,
                    d if d < 9.0 => 2,
                    _ => 0,
                });
            }
        }
    }
    let vol = LabelVolume::new(dims, "shells", labels)?;

    for (name, dtype) in [
        ("shells_u8.nii", NiftiDatatype::Uint8),
        ("shells_i16.nii.gz", NiftiDatatype::Int16),
    ] {
        let path = dir.path().join(name);
        write_nifti_volume(&Volume::Label(vol.clone()), &path, dtype)?;
        let back = load_volume(&path, VoxelKind::Label)?.into_labels()?;
        assert_eq!(back.voxels(), vol.voxels());
        println!(
            "{name}: {} bytes, case id `{}`",
            std::fs::metadata(&path)?.len(),
            back.header().case_id
        );
    }
    for region in Region::ALL {
        println!(
            "{region}: {} voxels",
            derive_mask(&vol, region).count_ones()
        );
    }
    Ok(())
}
