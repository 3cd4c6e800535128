//! earvein-core — pig identification from auricular vein patterns.
//!
//! A backlit ear photo is reduced to a 68-dimensional biometric signature and
//! matched against an enrolled herd. The pipeline stages are:
//!
//! 1. **imgcore** – raster primitives: CLAHE, convolution, adaptive
//!    thresholding, morphology, connected components, Canny, thinning.
//! 2. **roiseg** – inner-ear segmentation via adaptive red-channel and
//!    red-ratio thresholds followed by a morphological refinement chain.
//! 3. **veinmap** – vein enhancement, binarization, cleaning, edge merge,
//!    skeletonization and minutiae detection (endpoints / bifurcations).
//! 4. **featvec** – fixed 68-dimensional feature vector (counts, distance
//!    statistics, coordinate statistics, angle and density histograms).
//! 5. **classify** – standardization, stratified splitting, SVM-RBF,
//!    random forest, KNN and logistic regression with evaluation reports.
//! 6. **gallery** – persistent enrollment store and the end-to-end
//!    identify path.
//! 7. **synth** – synthetic backlit ear generator with exact ground truth,
//!    the desk-scale oracle for the whole pipeline.

pub mod classify;
pub mod error;
pub mod featvec;
pub mod gallery;
pub mod imgcore;
pub mod roiseg;
pub mod synth;
pub mod veinmap;

pub use error::{Error, Result};

/// splitmix64-style seed derivation; derived streams are independent for
/// distinct salts, which keeps parallel training and rendering deterministic.
pub(crate) fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(salt.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
