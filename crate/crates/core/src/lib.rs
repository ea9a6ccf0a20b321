//! Core algorithms for offline handwritten character recognition.
//!
//! The pipeline runs grayscale → Otsu binarization → Zhang–Suen thinning →
//! bounding-box crop, then turns the cropped skeleton into one of four
//! feature vectors (the 145-value multi-zone descriptor and three baselines)
//! that feed a nearest-mean classifier or a three-layer perceptron trained
//! by backpropagation or Levenberg–Marquardt.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, dataset
//! directories and the command line live in the `hcr` companion crate.

#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classify;
mod error;
pub mod features;
pub mod glyph;
pub mod image;
pub mod mlp;
pub mod preprocess;

pub use crate::error::{Error, Result};
pub use crate::features::{ExtractorKind, FeatureVector};
pub use crate::image::{BinaryImage, GrayImage, LabeledDataset};
