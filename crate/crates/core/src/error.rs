use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the vectorization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode image: {0}")]
    Decode(#[from] image::ImageError),

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("image must be at least {min}x{min} pixels, got {width}x{height}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("field is constant; no threshold separates two classes")]
    ConstantField,

    #[error("pixel mask is empty")]
    EmptyMask,

    #[error("path list is empty")]
    NoPaths,

    #[error("weight field sums to zero: no pixel lies within tau of a contour")]
    ZeroWeightField,

    #[error("non-finite gradient for {0}")]
    NonFiniteGradient(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("epoch {epoch} failed at iteration {iteration}: {message}")]
    Pipeline {
        epoch: usize,
        iteration: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
