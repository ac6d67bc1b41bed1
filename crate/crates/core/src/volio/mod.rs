//! Volume types and on-disk formats.
//!
//! Two formats are supported: a raw format (JSON sidecar header plus a flat
//! little-endian payload, x-fastest) used for fixtures and tool outputs, and
//! a NIfTI-1 single-file reader/writer for real challenge data. All loaders
//! validate type invariants before returning.

mod nifti;
mod raw;
mod report_io;

pub use nifti::{load_nifti_volume, write_nifti_volume, NiftiDatatype};
pub use raw::{encode_payload, load_raw_volume, payload_path_for, write_raw_volume, RawHeader};
pub use report_io::{
    read_case_scores, read_rank_table, read_report, write_rank_table, write_report, ReportFormat,
    ReportRow, RowKind,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labels allowed in a label volume. 0 is background.
pub const LABEL_ALPHABET: [u8; 4] = [0, 1, 2, 4];

/// Upper end of the integer uncertainty scale.
pub const MAX_UNCERTAINTY: u8 = 100;

/// Per-voxel class vectors must sum to one within this tolerance.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoxelKind {
    #[serde(rename = "label")]
    Label,
    #[serde(rename = "prob")]
    Probability,
    #[serde(rename = "unc")]
    Uncertainty,
}

impl VoxelKind {
    /// Bytes per stored element.
    pub fn element_width(self) -> usize {
        match self {
            VoxelKind::Label | VoxelKind::Uncertainty => 1,
            VoxelKind::Probability => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VoxelKind::Label => "label",
            VoxelKind::Probability => "prob",
            VoxelKind::Uncertainty => "unc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub kind: VoxelKind,
    pub case_id: String,
}

impl VolumeHeader {
    pub fn new(dims: [usize; 3], kind: VoxelKind, case_id: impl Into<String>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::MalformedHeader(format!(
                "every axis needs at least one voxel, got {dims:?}"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::MalformedHeader(format!("dims {dims:?} overflow")))?;
        Ok(Self {
            dims,
            kind,
            case_id: case_id.into(),
        })
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Multi-class segmentation labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVolume {
    header: VolumeHeader,
    voxels: Vec<u8>,
}

impl LabelVolume {
    pub fn new(dims: [usize; 3], case_id: impl Into<String>, voxels: Vec<u8>) -> Result<Self> {
        let header = VolumeHeader::new(dims, VoxelKind::Label, case_id)?;
        check_len(&header, voxels.len())?;
        if let Some((index, &value)) = voxels
            .iter()
            .enumerate()
            .find(|(_, v)| !LABEL_ALPHABET.contains(v))
        {
            return Err(Error::LabelOutOfAlphabet {
                index,
                value: value as f64,
            });
        }
        Ok(Self { header, voxels })
    }

    pub fn header(&self) -> &VolumeHeader {
        &self.header
    }

    pub fn dims(&self) -> [usize; 3] {
        self.header.dims
    }

    pub fn voxels(&self) -> &[u8] {
        &self.voxels
    }
}

/// Per-voxel uncertainty on the integer scale `0..=100`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncertaintyMap {
    header: VolumeHeader,
    voxels: Vec<u8>,
}

impl UncertaintyMap {
    pub fn new(dims: [usize; 3], case_id: impl Into<String>, voxels: Vec<u8>) -> Result<Self> {
        let header = VolumeHeader::new(dims, VoxelKind::Uncertainty, case_id)?;
        check_len(&header, voxels.len())?;
        if let Some((index, &value)) = voxels
            .iter()
            .enumerate()
            .find(|(_, &v)| v > MAX_UNCERTAINTY)
        {
            return Err(Error::UncertaintyOutOfRange {
                index,
                value: value as f64,
            });
        }
        Ok(Self { header, voxels })
    }

    pub fn header(&self) -> &VolumeHeader {
        &self.header
    }

    pub fn dims(&self) -> [usize; 3] {
        self.header.dims
    }

    pub fn voxels(&self) -> &[u8] {
        &self.voxels
    }
}

/// `K` class-probability volumes over `C` classes (MC samples or ensemble
/// members).
///
/// Storage is sample-major, then class, then voxel (x-fastest):
/// element `(k, c, v)` lives at `(k * C + c) * V + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityStack {
    header: VolumeHeader,
    classes: usize,
    samples: usize,
    data: Vec<f32>,
}

impl ProbabilityStack {
    pub fn new(
        dims: [usize; 3],
        case_id: impl Into<String>,
        classes: usize,
        samples: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        let header = VolumeHeader::new(dims, VoxelKind::Probability, case_id)?;
        if classes == 0 || samples == 0 {
            return Err(Error::MalformedHeader(format!(
                "probability stack needs classes >= 1 and samples >= 1, got C={classes}, K={samples}"
            )));
        }
        let voxels = header.voxel_count();
        let expected = voxels * classes * samples;
        if data.len() != expected {
            return Err(Error::PayloadSizeMismatch {
                expected: expected * 4,
                actual: data.len() * 4,
            });
        }
        for k in 0..samples {
            for v in 0..voxels {
                let mut sum = 0.0f64;
                for c in 0..classes {
                    let p = data[(k * classes + c) * voxels + v];
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidProbability(format!(
                            "sample {k}, class {c}, voxel {v}: value {p} outside [0, 1]"
                        )));
                    }
                    sum += p as f64;
                }
                if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                    return Err(Error::InvalidProbability(format!(
                        "sample {k}, voxel {v}: class probabilities sum to {sum}"
                    )));
                }
            }
        }
        Ok(Self {
            header,
            classes,
            samples,
            data,
        })
    }

    pub fn header(&self) -> &VolumeHeader {
        &self.header
    }

    pub fn dims(&self) -> [usize; 3] {
        self.header.dims
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn voxel_count(&self) -> usize {
        self.header.voxel_count()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn prob(&self, sample: usize, class: usize, voxel: usize) -> f32 {
        self.data[(sample * self.classes + class) * self.voxel_count() + voxel]
    }
}

/// Any loaded volume.
#[derive(Debug, Clone, PartialEq)]
pub enum Volume {
    Label(LabelVolume),
    Probability(ProbabilityStack),
    Uncertainty(UncertaintyMap),
}

impl Volume {
    pub fn header(&self) -> &VolumeHeader {
        match self {
            Volume::Label(v) => v.header(),
            Volume::Probability(v) => v.header(),
            Volume::Uncertainty(v) => v.header(),
        }
    }

    pub fn into_labels(self) -> Result<LabelVolume> {
        match self {
            Volume::Label(v) => Ok(v),
            other => Err(kind_error(VoxelKind::Label, other.header().kind)),
        }
    }

    pub fn into_uncertainty(self) -> Result<UncertaintyMap> {
        match self {
            Volume::Uncertainty(v) => Ok(v),
            other => Err(kind_error(VoxelKind::Uncertainty, other.header().kind)),
        }
    }

    pub fn into_probability(self) -> Result<ProbabilityStack> {
        match self {
            Volume::Probability(v) => Ok(v),
            other => Err(kind_error(VoxelKind::Probability, other.header().kind)),
        }
    }
}

fn kind_error(expected: VoxelKind, found: VoxelKind) -> Error {
    Error::MalformedHeader(format!(
        "expected a `{}` volume, found `{}`",
        expected.as_str(),
        found.as_str()
    ))
}

fn check_len(header: &VolumeHeader, len: usize) -> Result<()> {
    let expected = header.voxel_count();
    if len != expected {
        let w = header.kind.element_width();
        return Err(Error::PayloadSizeMismatch {
            expected: expected * w,
            actual: len * w,
        });
    }
    Ok(())
}

/// Loads a volume of the given kind, picking the format from the file name:
/// `.nii` / `.nii.gz` is read as NIfTI-1, anything else is treated as a raw
/// JSON header whose payload sits next to it with a `.raw` extension.
pub fn load_volume(path: &Path, kind: VoxelKind) -> Result<Volume> {
    if is_nifti_path(path) {
        load_nifti_volume(path, kind)
    } else {
        let vol = load_raw_volume(path, &payload_path_for(path))?;
        if vol.header().kind != kind {
            return Err(kind_error(kind, vol.header().kind));
        }
        Ok(vol)
    }
}

pub fn is_nifti_path(path: &Path) -> bool {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    name.ends_with(".nii") || name.ends_with(".nii.gz")
}

pub fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingFile(path.to_path_buf()))
    }
}

/// Writes `bytes` to `path` atomically: the target either holds the complete
/// content or is left untouched.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_alphabet_enforced() {
        assert!(LabelVolume::new([2, 2, 1], "c", vec![0, 1, 2, 4]).is_ok());
        assert!(matches!(
            LabelVolume::new([2, 2, 1], "c", vec![0, 1, 3, 4]),
            Err(Error::LabelOutOfAlphabet { index: 2, .. })
        ));
    }

    #[test]
    fn zero_axis_rejected() {
        assert!(matches!(
            UncertaintyMap::new([0, 2, 1], "c", vec![]),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn probability_sum_checked() {
        let ok = ProbabilityStack::new([1, 1, 1], "c", 2, 1, vec![0.25, 0.75]);
        assert!(ok.is_ok());
        let bad = ProbabilityStack::new([1, 1, 1], "c", 2, 1, vec![0.25, 0.70]);
        assert!(matches!(bad, Err(Error::InvalidProbability(_))));
        let neg = ProbabilityStack::new([1, 1, 1], "c", 2, 1, vec![-0.25, 1.25]);
        assert!(matches!(neg, Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn stack_indexing_is_sample_class_voxel() {
        // 2 voxels, 2 classes, 2 samples
        let data = vec![
            1.0, 0.0, // k0 c0
            0.0, 1.0, // k0 c1
            0.5, 0.25, // k1 c0
            0.5, 0.75, // k1 c1
        ];
        let s = ProbabilityStack::new([2, 1, 1], "c", 2, 2, data).unwrap();
        assert_eq!(s.prob(0, 1, 1), 1.0);
        assert_eq!(s.prob(1, 0, 1), 0.25);
        assert_eq!(s.prob(1, 1, 0), 0.5);
    }
}
