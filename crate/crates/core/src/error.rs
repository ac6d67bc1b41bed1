use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("payload size mismatch: expected {expected} bytes, found {actual}")]
    PayloadSizeMismatch { expected: usize, actual: usize },

    #[error("label {value} at voxel {index} is outside the alphabet {{0, 1, 2, 4}}")]
    LabelOutOfAlphabet { index: usize, value: f64 },

    #[error("uncertainty {value} at voxel {index} is outside [0, 100]")]
    UncertaintyOutOfRange { index: usize, value: f64 },

    #[error("invalid probability stack: {0}")]
    InvalidProbability(String),

    #[error("not a single-file NIfTI-1 volume: {0}")]
    NotNifti(String),

    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),

    #[error("expected a 3-D volume, found dim[0] = {0}")]
    DimensionalityNot3D(i16),

    #[error("volume dimensions differ: {left:?} vs {right:?}")]
    DimMismatch { left: [usize; 3], right: [usize; 3] },

    #[error("invalid threshold grid: {0}")]
    InvalidGrid(String),

    #[error("sweep has no unfiltered baseline (tau = 100)")]
    MissingBaseline,

    #[error("measure needs at least 2 samples, stack has {0}")]
    KTooSmall(usize),

    #[error("measure needs at least 2 classes, stack has {0}")]
    TooFewClasses(usize),

    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),

    #[error("threshold {tau} falls inside uncertainty range [{lo}, {hi}]")]
    GridIntersectsRange { tau: u8, lo: u8, hi: u8 },

    #[error(
        "incomplete cohort: method `{method}` has no score for case `{case_id}` region {region}"
    )]
    IncompleteCohort {
        method: String,
        case_id: String,
        region: String,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 1 for bad input, 2 for an internal invariant
    /// violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}
