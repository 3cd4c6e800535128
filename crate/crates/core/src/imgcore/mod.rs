//! Raster primitives shared by every pipeline stage.
//!
//! All operations are pure functions of immutable inputs and safe to call
//! concurrently; batch callers parallelize per image.

mod canny;
mod clahe;
mod components;
mod convolve;
pub mod io;
mod morphology;
mod skeleton;
mod threshold;

pub use canny::canny;
pub use clahe::clahe;
pub use components::{connected_components, fill_holes, remove_small_objects};
pub use convolve::convolve3x3;
pub use morphology::{dilate, erode, morph_close, morph_open};
pub use skeleton::skeletonize;
pub use threshold::{adaptive_mean_threshold, otsu_level};

use crate::error::{Error, Result};

/// Single-channel 8-bit raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid_param(format!(
                "gray image data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage {
            width,
            height,
            data,
        }
    }

    pub fn constant(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel lookup with replicate-border semantics for out-of-range coordinates.
    #[inline]
    pub fn get_replicate(&self, x: isize, y: isize) -> u8 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(u8) -> u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }
}

/// 8-bit RGB raster stored as three planes of identical dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pub r: GrayImage,
    pub g: GrayImage,
    pub b: GrayImage,
}

impl RasterImage {
    pub fn from_planes(r: GrayImage, g: GrayImage, b: GrayImage) -> Result<Self> {
        if r.width != g.width || r.width != b.width || r.height != g.height || r.height != b.height
        {
            return Err(Error::DimensionMismatch {
                expected_w: r.width,
                expected_h: r.height,
                found_w: g.width.max(b.width),
                found_h: g.height.max(b.height),
            });
        }
        Ok(RasterImage {
            width: r.width,
            height: r.height,
            r,
            g,
            b,
        })
    }

    pub fn new(width: usize, height: usize) -> Self {
        RasterImage {
            width,
            height,
            r: GrayImage::new(width, height),
            g: GrayImage::new(width, height),
            b: GrayImage::new(width, height),
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (u8, u8, u8) {
        (self.r.get(x, y), self.g.get(x, y), self.b.get(x, y))
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: (u8, u8, u8)) {
        self.r.set(x, y, rgb.0);
        self.g.set(x, y, rgb.1);
        self.b.set(x, y, rgb.2);
    }

    /// Zero out every pixel not covered by `mask`.
    pub fn masked(&self, mask: &BinaryMask) -> Result<RasterImage> {
        check_same_dims(self.width, self.height, mask.width, mask.height)?;
        let mut out = self.clone();
        for i in 0..self.width * self.height {
            if !mask.data[i] {
                out.r.data[i] = 0;
                out.g.data[i] = 0;
                out.b.data[i] = 0;
            }
        }
        Ok(out)
    }
}

/// Extract the three channel planes of an RGB raster.
pub fn split_channels(img: &RasterImage) -> (GrayImage, GrayImage, GrayImage) {
    (img.r.clone(), img.g.clone(), img.b.clone())
}

/// Boolean raster, row-major. `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid_param(format!(
                "mask data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Lookup treating out-of-bounds as background.
    #[inline]
    pub fn get_checked(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            false
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [bool] {
        &mut self.data
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// True when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(&a, &b)| !a || b)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        check_same_dims(self.width, self.height, other.width, other.height)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a && b)
                .collect(),
        })
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        check_same_dims(self.width, self.height, other.width, other.height)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a || b)
                .collect(),
        })
    }

    /// Intersection-over-union against another mask of the same dimensions.
    pub fn iou(&self, other: &BinaryMask) -> Result<f64> {
        check_same_dims(self.width, self.height, other.width, other.height)?;
        let mut inter = 0usize;
        let mut union = 0usize;
        for (&a, &b) in self.data.iter().zip(&other.data) {
            if a && b {
                inter += 1;
            }
            if a || b {
                union += 1;
            }
        }
        if union == 0 {
            return Ok(1.0);
        }
        Ok(inter as f64 / union as f64)
    }
}

pub(crate) fn check_same_dims(w0: usize, h0: usize, w1: usize, h1: usize) -> Result<()> {
    if w0 != w1 || h0 != h1 {
        return Err(Error::DimensionMismatch {
            expected_w: w0,
            expected_h: h0,
            found_w: w1,
            found_h: h1,
        });
    }
    Ok(())
}

/// Filled square structuring element with its origin at the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    side: usize,
}

impl StructuringElement {
    pub const SQUARE3: StructuringElement = StructuringElement { side: 3 };
    pub const SQUARE5: StructuringElement = StructuringElement { side: 5 };

    pub fn square(side: usize) -> Result<Self> {
        if side != 3 && side != 5 {
            return Err(Error::invalid_param(format!(
                "structuring element side must be 3 or 5, got {side}"
            )));
        }
        Ok(StructuringElement { side })
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.side / 2
    }
}

/// Connected-component labeling result. Label 0 is background; component
/// labels are contiguous 1..=K in row-major order of first encounter.
#[derive(Debug, Clone)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl LabelMap {
    pub(crate) fn new(width: usize, height: usize, labels: Vec<u32>, sizes: Vec<usize>) -> Self {
        LabelMap {
            width,
            height,
            labels,
            sizes,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of components K.
    pub fn num_components(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Pixel count of component `label` (1-based).
    pub fn size_of(&self, label: u32) -> usize {
        self.sizes[label as usize - 1]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Mask containing only the pixels of `label`.
    pub fn component_mask(&self, label: u32) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&l| l == label).collect(),
        }
    }

    /// Mask containing the pixels of every label in `keep`.
    pub fn mask_of_labels(&self, keep: &[u32]) -> BinaryMask {
        let mut lut = vec![false; self.sizes.len() + 1];
        for &l in keep {
            lut[l as usize] = true;
        }
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&l| lut[l as usize]).collect(),
        }
    }
}

/// 3x3 convolution kernel, row-major signed coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel3x3 {
    pub coefficients: [f32; 9],
}

impl Kernel3x3 {
    pub const fn new(coefficients: [f32; 9]) -> Self {
        Kernel3x3 { coefficients }
    }

    /// The vein sharpening kernel: center 5, cross neighbors -1.
    pub const fn sharpen() -> Self {
        Kernel3x3::new([0.0, -1.0, 0.0, -1.0, 5.0, -1.0, 0.0, -1.0, 0.0])
    }

    pub const fn identity() -> Self {
        Kernel3x3::new([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_channels_single_pixel() {
        let mut img = RasterImage::new(1, 1);
        img.set(0, 0, (10, 20, 30));
        let (r, g, b) = split_channels(&img);
        assert_eq!(r.get(0, 0), 10);
        assert_eq!(g.get(0, 0), 20);
        assert_eq!(b.get(0, 0), 30);
    }

    #[test]
    fn split_channels_black() {
        let img = RasterImage::new(4, 3);
        let (r, g, b) = split_channels(&img);
        assert!(r.data().iter().all(|&v| v == 0));
        assert!(g.data().iter().all(|&v| v == 0));
        assert!(b.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn structuring_element_side_validation() {
        assert!(StructuringElement::square(3).is_ok());
        assert!(StructuringElement::square(5).is_ok());
        assert!(StructuringElement::square(4).is_err());
        assert!(StructuringElement::square(7).is_err());
    }

    #[test]
    fn raster_plane_dims_must_match() {
        let r = GrayImage::new(3, 3);
        let g = GrayImage::new(3, 3);
        let b = GrayImage::new(2, 3);
        assert!(RasterImage::from_planes(r, g, b).is_err());
    }

    #[test]
    fn mask_iou_of_disjoint_is_zero() {
        let a = BinaryMask::from_fn(4, 1, |x, _| x < 2);
        let b = BinaryMask::from_fn(4, 1, |x, _| x >= 2);
        assert_eq!(a.iou(&b).unwrap(), 0.0);
        assert_eq!(a.iou(&a).unwrap(), 1.0);
    }
}
