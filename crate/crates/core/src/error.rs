use alloc::string::String;

/// Errors produced by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("pixel buffer of length {len} does not match {width}x{height}")]
    BufferSize { width: usize, height: usize, len: usize },
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,
    #[error("blank image: no foreground pixels")]
    BlankImage,
    #[error("{width}x{height} image is smaller than a {rows}x{cols} zone grid")]
    GridTooLarge { width: usize, height: usize, rows: usize, cols: usize },
    #[error("zone has no pixels")]
    EmptyZone,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no stroke template for class {0:?}")]
    MissingTemplate(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("label {label} out of range for alphabet of {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("duplicate alphabet entry {0:?}")]
    DuplicateClass(String),
    #[error("class {0:?} has no training samples")]
    EmptyClass(String),
    #[error("feature vectors come from different extractors")]
    MixedExtractors,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("non-finite value encountered at iteration {0}")]
    NonFinite(usize),
    #[error("linear system stayed singular up to damping {mu:e}")]
    Singular { mu: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
