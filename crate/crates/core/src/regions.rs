//! Binary evaluation tasks derived from multi-class labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::volio::{LabelVolume, VolumeHeader, VoxelKind};

/// Nested tumour sub-regions: ET ⊆ TC ⊆ WT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Whole tumour: labels {1, 2, 4}.
    WT,
    /// Tumour core: labels {1, 4}.
    TC,
    /// Enhancing tumour: label {4}.
    ET,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::WT, Region::TC, Region::ET];

    pub fn labels(self) -> &'static [u8] {
        match self {
            Region::WT => &[1, 2, 4],
            Region::TC => &[1, 4],
            Region::ET => &[4],
        }
    }

    #[inline]
    pub fn contains(self, label: u8) -> bool {
        match self {
            Region::WT => matches!(label, 1 | 2 | 4),
            Region::TC => matches!(label, 1 | 4),
            Region::ET => label == 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::WT => "WT",
            Region::TC => "TC",
            Region::ET => "ET",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "WT" => Ok(Region::WT),
            "TC" => Ok(Region::TC),
            "ET" => Ok(Region::ET),
            other => Err(Error::InvalidArgument(format!(
                "unknown region `{other}` (expected WT, TC or ET)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    header: VolumeHeader,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// Builds a mask directly from bits; the header kind is recorded as
    /// `label` since masks are derived from label volumes.
    pub fn from_bits(
        dims: [usize; 3],
        case_id: impl Into<String>,
        bits: Vec<bool>,
    ) -> crate::Result<Self> {
        let header = VolumeHeader::new(dims, VoxelKind::Label, case_id)?;
        if bits.len() != header.voxel_count() {
            return Err(Error::PayloadSizeMismatch {
                expected: header.voxel_count(),
                actual: bits.len(),
            });
        }
        Ok(Self { header, bits })
    }

    pub fn header(&self) -> &VolumeHeader {
        &self.header
    }

    pub fn dims(&self) -> [usize; 3] {
        self.header.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Encodes the mask as a label volume, writing `label` where set.
    pub fn to_labels(&self, label: u8) -> crate::Result<LabelVolume> {
        LabelVolume::new(
            self.dims(),
            self.header.case_id.clone(),
            self.bits
                .iter()
                .map(|&b| if b { label } else { 0 })
                .collect(),
        )
    }
}

pub fn derive_mask(labels: &LabelVolume, region: Region) -> BinaryMask {
    BinaryMask {
        header: labels.header().clone(),
        bits: labels
            .voxels()
            .iter()
            .map(|&l| region.contains(l))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn four() -> LabelVolume {
        LabelVolume::new([2, 2, 1], "c", vec![0, 1, 2, 4]).unwrap()
    }

    #[test]
    fn region_masks_on_alphabet() {
        let l = four();
        assert_eq!(
            derive_mask(&l, Region::WT).bits(),
            &[false, true, true, true]
        );
        assert_eq!(
            derive_mask(&l, Region::TC).bits(),
            &[false, true, false, true]
        );
        assert_eq!(
            derive_mask(&l, Region::ET).bits(),
            &[false, false, false, true]
        );
    }

    #[test]
    fn contains_agrees_with_label_table() {
        for r in Region::ALL {
            for l in [0u8, 1, 2, 4] {
                assert_eq!(r.contains(l), r.labels().contains(&l));
            }
        }
    }

    #[test]
    fn parse_tags() {
        assert_eq!("wt".parse::<Region>().unwrap(), Region::WT);
        assert_eq!(" ET ".parse::<Region>().unwrap(), Region::ET);
        assert!("XX".parse::<Region>().is_err());
        for r in Region::ALL {
            assert_eq!(r.to_string().parse::<Region>().unwrap(), r);
        }
    }

    fn labels_strategy() -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(prop::sample::select(vec![0u8, 1, 2, 4]), 1..200)
    }

    proptest! {
        #[test]
        fn masks_are_nested(voxels in labels_strategy()) {
            let n = voxels.len();
            let l = LabelVolume::new([n, 1, 1], "p", voxels).unwrap();
            let wt = derive_mask(&l, Region::WT);
            let tc = derive_mask(&l, Region::TC);
            let et = derive_mask(&l, Region::ET);
            for i in 0..n {
                prop_assert!(!et.bits()[i] || tc.bits()[i]);
                prop_assert!(!tc.bits()[i] || wt.bits()[i]);
            }
        }

        #[test]
        fn single_voxel_change_is_local(
            voxels in labels_strategy(),
            idx in any::<prop::sample::Index>(),
            new in prop::sample::select(vec![0u8, 1, 2, 4]),
        ) {
            let n = voxels.len();
            let i = idx.index(n);
            let mut edited = voxels.clone();
            edited[i] = new;
            let a = LabelVolume::new([n, 1, 1], "p", voxels).unwrap();
            let b = LabelVolume::new([n, 1, 1], "p", edited).unwrap();
            for r in Region::ALL {
                let (ma, mb) = (derive_mask(&a, r), derive_mask(&b, r));
                let diff = ma.bits().iter().zip(mb.bits()).filter(|(x, y)| x != y).count();
                prop_assert!(diff <= 1);
            }
        }
    }
}
