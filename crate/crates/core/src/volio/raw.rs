use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    require_file, write_atomic, LabelVolume, ProbabilityStack, UncertaintyMap, Volume,
    VolumeHeader, VoxelKind,
};
use crate::error::{Error, Result};

/// JSON sidecar describing a raw payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHeader {
    pub dims: [usize; 3],
    pub kind: VoxelKind,
    pub case_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl RawHeader {
    pub fn for_volume(volume: &Volume) -> Self {
        let VolumeHeader {
            dims,
            kind,
            case_id,
        } = volume.header().clone();
        let (classes, samples) = match volume {
            Volume::Probability(s) => (Some(s.classes()), Some(s.samples())),
            _ => (None, None),
        };
        Self {
            dims,
            kind,
            case_id,
            classes,
            samples,
        }
    }

    fn payload_len(&self) -> Result<usize> {
        let voxels = VolumeHeader::new(self.dims, self.kind, "")?.voxel_count();
        let per_voxel = match self.kind {
            VoxelKind::Probability => {
                let classes = self.classes.ok_or_else(|| {
                    Error::MalformedHeader("probability header needs `classes`".into())
                })?;
                let samples = self.samples.ok_or_else(|| {
                    Error::MalformedHeader("probability header needs `samples`".into())
                })?;
                classes * samples * 4
            }
            _ => {
                if self.classes.is_some() || self.samples.is_some() {
                    return Err(Error::MalformedHeader(format!(
                        "`classes`/`samples` only apply to `prob` volumes, not `{}`",
                        self.kind.as_str()
                    )));
                }
                1
            }
        };
        Ok(voxels * per_voxel)
    }
}

/// `foo.json` -> `foo.raw`.
pub fn payload_path_for(header_path: &Path) -> PathBuf {
    header_path.with_extension("raw")
}

pub fn load_raw_volume(header_path: &Path, payload_path: &Path) -> Result<Volume> {
    require_file(header_path)?;
    require_file(payload_path)?;
    let text = std::fs::read_to_string(header_path)?;
    let header: RawHeader = serde_json::from_str(&text)
        .map_err(|e| Error::MalformedHeader(format!("{}: {e}", header_path.display())))?;
    let payload = std::fs::read(payload_path)?;
    decode(&header, payload)
}

fn decode(header: &RawHeader, payload: Vec<u8>) -> Result<Volume> {
    let expected = header.payload_len()?;
    if payload.len() != expected {
        return Err(Error::PayloadSizeMismatch {
            expected,
            actual: payload.len(),
        });
    }
    let case_id = header.case_id.clone();
    Ok(match header.kind {
        VoxelKind::Label => Volume::Label(LabelVolume::new(header.dims, case_id, payload)?),
        VoxelKind::Uncertainty => {
            Volume::Uncertainty(UncertaintyMap::new(header.dims, case_id, payload)?)
        }
        VoxelKind::Probability => {
            let data = payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            Volume::Probability(ProbabilityStack::new(
                header.dims,
                case_id,
                header.classes.unwrap_or_default(),
                header.samples.unwrap_or_default(),
                data,
            )?)
        }
    })
}

/// Serializes the voxel payload exactly as it is stored on disk.
pub fn encode_payload(volume: &Volume) -> Vec<u8> {
    match volume {
        Volume::Label(v) => v.voxels().to_vec(),
        Volume::Uncertainty(v) => v.voxels().to_vec(),
        Volume::Probability(s) => s.data().iter().flat_map(|p| p.to_le_bytes()).collect(),
    }
}

pub fn write_raw_volume(volume: &Volume, header_path: &Path, payload_path: &Path) -> Result<()> {
    let header = RawHeader::for_volume(volume);
    write_atomic(payload_path, &encode_payload(volume))?;
    let mut text = serde_json::to_string_pretty(&header)?;
    text.push('\n');
    write_atomic(header_path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(dir: &Path, header: &str, payload: &[u8]) -> (PathBuf, PathBuf) {
        let h = dir.join("vol.json");
        let p = dir.join("vol.raw");
        std::fs::write(&h, header).unwrap();
        std::fs::write(&p, payload).unwrap();
        (h, p)
    }

    #[test]
    fn minimal_label_volume() {
        let dir = tempfile::tempdir().unwrap();
        let (h, p) = write_fixture(
            dir.path(),
            r#"{"dims":[2,2,1],"kind":"label","case_id":"c0"}"#,
            &[0, 1, 2, 4],
        );
        let vol = load_raw_volume(&h, &p).unwrap().into_labels().unwrap();
        assert_eq!(vol.voxels(), &[0, 1, 2, 4]);
        assert_eq!(vol.dims(), [2, 2, 1]);
        assert_eq!(vol.header().case_id, "c0");
    }

    #[test]
    fn short_payload_is_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (h, p) = write_fixture(
            dir.path(),
            r#"{"dims":[2,2,1],"kind":"label","case_id":"c0"}"#,
            &[0, 1, 2],
        );
        assert!(matches!(
            load_raw_volume(&h, &p),
            Err(Error::PayloadSizeMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn uncertainty_above_100_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (h, p) = write_fixture(
            dir.path(),
            r#"{"dims":[2,1,1],"kind":"unc","case_id":"c0"}"#,
            &[100, 101],
        );
        assert!(matches!(
            load_raw_volume(&h, &p),
            Err(Error::UncertaintyOutOfRange { index: 1, .. })
        ));
    }

    #[test]
    fn missing_payload() {
        let dir = tempfile::tempdir().unwrap();
        let h = dir.path().join("vol.json");
        std::fs::write(&h, r#"{"dims":[1,1,1],"kind":"unc","case_id":"c"}"#).unwrap();
        assert!(matches!(
            load_raw_volume(&h, &dir.path().join("nope.raw")),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn malformed_headers() {
        let dir = tempfile::tempdir().unwrap();
        for bad in [
            "not json",
            r#"{"dims":[1,1],"kind":"unc","case_id":"c"}"#,
            r#"{"dims":[1,1,1],"kind":"mask","case_id":"c"}"#,
            r#"{"dims":[0,1,1],"kind":"unc","case_id":"c"}"#,
            r#"{"dims":[1,1,1],"kind":"prob","case_id":"c","classes":2}"#,
            r#"{"dims":[1,1,1],"kind":"unc","case_id":"c","samples":2}"#,
        ] {
            let (h, p) = write_fixture(dir.path(), bad, &[0]);
            assert!(
                matches!(load_raw_volume(&h, &p), Err(Error::MalformedHeader(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn probability_stack_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let stack =
            ProbabilityStack::new([1, 1, 1], "p", 2, 2, vec![0.75, 0.25, 0.5, 0.5]).unwrap();
        let vol = Volume::Probability(stack);
        let h = dir.path().join("s.json");
        let p = payload_path_for(&h);
        write_raw_volume(&vol, &h, &p).unwrap();
        assert_eq!(load_raw_volume(&h, &p).unwrap(), vol);
        assert_eq!(std::fs::read(&p).unwrap().len(), 16);
    }
}
