//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// ROI segmentation produced no candidate ear region.
    #[error("segmentation found no candidate ear region")]
    SegmentationEmpty,

    /// Vein extraction produced an empty skeleton.
    #[error("no vein structures found inside the ear region")]
    VeinsNotFound,

    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {found_w}x{found_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        found_w: usize,
        found_h: usize,
    },

    #[error("image has zero dimensions")]
    ZeroImageDims,

    #[error("{0}")]
    InvalidParam(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("training requires at least two classes")]
    NeedTwoClasses,

    #[error("class '{label}' has only {count} sample(s); at least 2 are required to split")]
    ClassTooSmall { label: String, count: usize },

    #[error("feature vector has length {found}, expected {expected}")]
    FeatureLength { expected: usize, found: usize },

    #[error("gallery line {line}: {message}")]
    GalleryLine { line: usize, message: String },

    #[error("unsupported format version {found}, expected {expected}")]
    UnsupportedVersion { expected: u32, found: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn invalid_param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}
