//! Minimal NIfTI-1 single-file (`n+1`) support: 3-D volumes of uint8, int16
//! or float32, optionally gzip-compressed. Orientation is ignored; voxels are
//! taken in stored index order.

use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{
    require_file, write_atomic, LabelVolume, UncertaintyMap, Volume, VoxelKind, LABEL_ALPHABET,
    MAX_UNCERTAINTY,
};
use crate::error::{Error, Result};

const HEADER_SIZE: usize = 348;
const DEFAULT_VOX_OFFSET: usize = 352;
const MAGIC_SINGLE: &[u8; 4] = b"n+1\0";

const OFF_DIM: usize = 40;
const OFF_DATATYPE: usize = 70;
const OFF_BITPIX: usize = 72;
const OFF_PIXDIM: usize = 76;
const OFF_VOX_OFFSET: usize = 108;
const OFF_SCL_SLOPE: usize = 112;
const OFF_SCL_INTER: usize = 116;
const OFF_MAGIC: usize = 344;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiftiDatatype {
    Uint8,
    Int16,
    Float32,
}

impl NiftiDatatype {
    fn code(self) -> i16 {
        match self {
            NiftiDatatype::Uint8 => 2,
            NiftiDatatype::Int16 => 4,
            NiftiDatatype::Float32 => 16,
        }
    }

    fn from_code(code: i16) -> Result<Self> {
        match code {
            2 => Ok(NiftiDatatype::Uint8),
            4 => Ok(NiftiDatatype::Int16),
            16 => Ok(NiftiDatatype::Float32),
            other => Err(Error::UnsupportedDatatype(other)),
        }
    }

    fn width(self) -> usize {
        match self {
            NiftiDatatype::Uint8 => 1,
            NiftiDatatype::Int16 => 2,
            NiftiDatatype::Float32 => 4,
        }
    }
}

#[derive(Clone, Copy)]
enum Endian {
    Little,
    Big,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    endian: Endian,
}

impl Cursor<'_> {
    fn i16_at(&self, off: usize) -> i16 {
        let b = [self.bytes[off], self.bytes[off + 1]];
        match self.endian {
            Endian::Little => i16::from_le_bytes(b),
            Endian::Big => i16::from_be_bytes(b),
        }
    }

    fn f32_at(&self, off: usize) -> f32 {
        let b = [
            self.bytes[off],
            self.bytes[off + 1],
            self.bytes[off + 2],
            self.bytes[off + 3],
        ];
        match self.endian {
            Endian::Little => f32::from_le_bytes(b),
            Endian::Big => f32::from_be_bytes(b),
        }
    }
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::NotNifti(format!("gzip stream: {e}")))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Reads a NIfTI-1 file as a label volume or an uncertainty map. The case id
/// is the file name without its `.nii`/`.nii.gz` suffix.
pub fn load_nifti_volume(path: &Path, expected_kind: VoxelKind) -> Result<Volume> {
    require_file(path)?;
    if expected_kind == VoxelKind::Probability {
        return Err(Error::InvalidArgument(
            "probability stacks are only read from the raw format".into(),
        ));
    }
    let bytes = read_maybe_gz(path)?;
    if bytes.len() < HEADER_SIZE {
        return Err(Error::NotNifti(format!(
            "{} bytes is shorter than a NIfTI-1 header",
            bytes.len()
        )));
    }
    let sizeof_hdr = [bytes[0], bytes[1], bytes[2], bytes[3]];
    let endian = if i32::from_le_bytes(sizeof_hdr) == HEADER_SIZE as i32 {
        Endian::Little
    } else if i32::from_be_bytes(sizeof_hdr) == HEADER_SIZE as i32 {
        Endian::Big
    } else {
        return Err(Error::NotNifti("sizeof_hdr is not 348".into()));
    };
    if &bytes[OFF_MAGIC..OFF_MAGIC + 4] != MAGIC_SINGLE {
        return Err(Error::NotNifti(format!(
            "magic {:?} is not \"n+1\"",
            String::from_utf8_lossy(&bytes[OFF_MAGIC..OFF_MAGIC + 3])
        )));
    }
    let cur = Cursor {
        bytes: &bytes,
        endian,
    };

    let ndim = cur.i16_at(OFF_DIM);
    if ndim != 3 {
        return Err(Error::DimensionalityNot3D(ndim));
    }
    let mut dims = [0usize; 3];
    for (axis, d) in dims.iter_mut().enumerate() {
        let n = cur.i16_at(OFF_DIM + 2 * (axis + 1));
        if n < 1 {
            return Err(Error::MalformedHeader(format!("dim[{}] = {n}", axis + 1)));
        }
        *d = n as usize;
    }
    let datatype = NiftiDatatype::from_code(cur.i16_at(OFF_DATATYPE))?;

    let vox_offset = cur.f32_at(OFF_VOX_OFFSET);
    if !vox_offset.is_finite() || vox_offset < HEADER_SIZE as f32 {
        return Err(Error::MalformedHeader(format!("vox_offset = {vox_offset}")));
    }
    let start = vox_offset as usize;
    let nvox: usize = dims.iter().product();
    let needed = nvox * datatype.width();
    let available = bytes.len().saturating_sub(start);
    if available < needed {
        return Err(Error::PayloadSizeMismatch {
            expected: needed,
            actual: available,
        });
    }
    let data = &bytes[start..start + needed];

    let slope = cur.f32_at(OFF_SCL_SLOPE);
    let inter = cur.f32_at(OFF_SCL_INTER);
    let scaling = (slope.is_finite() && slope != 0.0 && (slope != 1.0 || inter != 0.0))
        .then_some((slope as f64, inter as f64));

    let values: Vec<f64> = match datatype {
        NiftiDatatype::Uint8 => data.iter().map(|&b| b as f64).collect(),
        NiftiDatatype::Int16 => data
            .chunks_exact(2)
            .map(|b| {
                let v = match endian {
                    Endian::Little => i16::from_le_bytes([b[0], b[1]]),
                    Endian::Big => i16::from_be_bytes([b[0], b[1]]),
                };
                v as f64
            })
            .collect(),
        NiftiDatatype::Float32 => data
            .chunks_exact(4)
            .map(|b| {
                let b = [b[0], b[1], b[2], b[3]];
                let v = match endian {
                    Endian::Little => f32::from_le_bytes(b),
                    Endian::Big => f32::from_be_bytes(b),
                };
                v as f64
            })
            .collect(),
    };

    let case_id = case_id_from_path(path);
    let scaled = values
        .into_iter()
        .map(|v| scaling.map_or(v, |(s, i)| v * s + i));

    match expected_kind {
        VoxelKind::Label => {
            let voxels = scaled
                .enumerate()
                .map(|(index, value)| {
                    let r = value.round();
                    if r.is_finite()
                        && (0.0..=255.0).contains(&r)
                        && LABEL_ALPHABET.contains(&(r as u8))
                    {
                        Ok(r as u8)
                    } else {
                        Err(Error::LabelOutOfAlphabet { index, value })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Volume::Label(LabelVolume::new(dims, case_id, voxels)?))
        }
        _ => {
            let voxels = scaled
                .enumerate()
                .map(|(index, value)| {
                    let r = value.round();
                    if r.is_finite() && r >= 0.0 && r <= MAX_UNCERTAINTY as f64 {
                        Ok(r as u8)
                    } else {
                        Err(Error::UncertaintyOutOfRange { index, value })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Volume::Uncertainty(UncertaintyMap::new(
                dims, case_id, voxels,
            )?))
        }
    }
}

fn case_id_from_path(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let lower = name.to_ascii_lowercase();
    for suffix in [".nii.gz", ".nii"] {
        if lower.ends_with(suffix) {
            return name[..name.len() - suffix.len()].to_string();
        }
    }
    name
}

pub(crate) fn encode_header(dim: [i16; 8], datatype: NiftiDatatype) -> Vec<u8> {
    let mut h = vec![0u8; DEFAULT_VOX_OFFSET];
    h[0..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
    for (i, d) in dim.iter().enumerate() {
        h[OFF_DIM + 2 * i..OFF_DIM + 2 * i + 2].copy_from_slice(&d.to_le_bytes());
    }
    h[OFF_DATATYPE..OFF_DATATYPE + 2].copy_from_slice(&datatype.code().to_le_bytes());
    let bitpix = (datatype.width() * 8) as i16;
    h[OFF_BITPIX..OFF_BITPIX + 2].copy_from_slice(&bitpix.to_le_bytes());
    for i in 0..8 {
        h[OFF_PIXDIM + 4 * i..OFF_PIXDIM + 4 * i + 4].copy_from_slice(&1.0f32.to_le_bytes());
    }
    h[OFF_VOX_OFFSET..OFF_VOX_OFFSET + 4]
        .copy_from_slice(&(DEFAULT_VOX_OFFSET as f32).to_le_bytes());
    h[OFF_SCL_SLOPE..OFF_SCL_SLOPE + 4].copy_from_slice(&1.0f32.to_le_bytes());
    h[OFF_MAGIC..OFF_MAGIC + 4].copy_from_slice(MAGIC_SINGLE);
    h
}

/// Writes a label volume or uncertainty map as little-endian NIfTI-1. The
/// output is gzip-compressed when the path ends in `.gz`.
pub fn write_nifti_volume(volume: &Volume, path: &Path, datatype: NiftiDatatype) -> Result<()> {
    let (dims, voxels) = match volume {
        Volume::Label(v) => (v.dims(), v.voxels()),
        Volume::Uncertainty(v) => (v.dims(), v.voxels()),
        Volume::Probability(_) => {
            return Err(Error::InvalidArgument(
                "probability stacks cannot be written as NIfTI".into(),
            ))
        }
    };
    let mut dim = [1i16; 8];
    dim[0] = 3;
    for (axis, &d) in dims.iter().enumerate() {
        dim[axis + 1] = i16::try_from(d).map_err(|_| {
            Error::InvalidArgument(format!("axis length {d} does not fit NIfTI-1 int16 dims"))
        })?;
    }
    let mut bytes = encode_header(dim, datatype);
    for &v in voxels {
        match datatype {
            NiftiDatatype::Uint8 => bytes.push(v),
            NiftiDatatype::Int16 => bytes.extend_from_slice(&(v as i16).to_le_bytes()),
            NiftiDatatype::Float32 => bytes.extend_from_slice(&(v as f32).to_le_bytes()),
        }
    }
    let is_gz = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    if is_gz {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&bytes)?;
        bytes = enc.finish()?;
    }
    write_atomic(path, &bytes)
}
