//! Inner-ear segmentation.
//!
//! The inner ear dominates the red channel, so the raw mask selects pixels
//! that pass a red-intensity threshold and two red-ratio thresholds, all
//! chosen adaptively from image statistics. A close/open chain with a 5x5
//! square, largest-component selection and hole filling turn that raw mask
//! into the final single-component ROI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{
    self, check_same_dims, BinaryMask, GrayImage, RasterImage, StructuringElement,
};

/// Red-channel population statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: f64,
    pub stddev: f64,
}

/// Per-pixel red-to-green and red-to-blue ratio maps.
#[derive(Debug, Clone)]
pub struct RatioMaps {
    width: usize,
    height: usize,
    pub rg: Vec<f32>,
    pub rb: Vec<f32>,
    pub epsilon: f32,
}

impl RatioMaps {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

/// The three thresholds the raw mask must satisfy simultaneously.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiThresholds {
    pub t_red: f64,
    pub t_rg: f64,
    pub t_rb: f64,
}

/// Warning statuses that do not abort segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SegmentationWarning {
    /// Final mask covers less than the configured fraction of the image.
    TooSmall { coverage: f64 },
}

#[derive(Debug, Clone)]
pub struct RoiResult {
    pub mask: BinaryMask,
    pub roi_image: RasterImage,
    pub thresholds: RoiThresholds,
    pub stats: ChannelStats,
    pub warning: Option<SegmentationWarning>,
}

/// Intermediate masks of the segmentation chain, kept for debug emission.
#[derive(Debug, Clone)]
pub struct RoiStages {
    pub raw: BinaryMask,
    pub refined: BinaryMask,
    pub largest: BinaryMask,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RoiConfig {
    /// Percentile of red values used by the two low-contrast tiers (0-100).
    pub percentile: f64,
    /// Ratio-threshold scale for bright images (mean red > 60).
    pub bright_scale: f64,
    /// Ratio-threshold scale for dark images (mean red < 10).
    pub dark_scale: f64,
    /// Ratio-threshold scale for everything in between.
    pub mid_scale: f64,
    /// Division guard for the ratio maps.
    pub epsilon: f64,
    /// Mask coverage below this fraction raises a TooSmall warning.
    pub min_coverage: f64,
}

impl Default for RoiConfig {
    fn default() -> Self {
        RoiConfig {
            percentile: 50.0,
            bright_scale: 0.9,
            dark_scale: 1.1,
            mid_scale: 1.0,
            epsilon: 1e-6,
            min_coverage: 0.005,
        }
    }
}

/// Clamp bounds for the red threshold, shared by all four contrast tiers.
pub const T_RED_MIN: f64 = 20.0;
pub const T_RED_MAX: f64 = 35.0;

/// Population mean and standard deviation of a channel.
pub fn channel_stats(r: &GrayImage) -> ChannelStats {
    let n = r.data().len();
    assert!(n > 0, "channel_stats requires a non-empty image");
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for &v in r.data() {
        let f = v as f64;
        sum += f;
        sum_sq += f * f;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    ChannelStats {
        mean,
        stddev: var.sqrt(),
    }
}

/// Elementwise R/(G+eps) and R/(B+eps).
pub fn ratio_maps(r: &GrayImage, g: &GrayImage, b: &GrayImage, eps: f64) -> Result<RatioMaps> {
    check_same_dims(r.width(), r.height(), g.width(), g.height())?;
    check_same_dims(r.width(), r.height(), b.width(), b.height())?;
    if eps <= 0.0 {
        return Err(Error::invalid_param("ratio epsilon must be positive"));
    }
    let epsilon = eps as f32;
    let n = r.data().len();
    let mut rg = vec![0.0f32; n];
    let mut rb = vec![0.0f32; n];
    for i in 0..n {
        let rv = r.data()[i] as f32;
        rg[i] = rv / (g.data()[i] as f32 + epsilon);
        rb[i] = rv / (b.data()[i] as f32 + epsilon);
    }
    Ok(RatioMaps {
        width: r.width(),
        height: r.height(),
        rg,
        rb,
        epsilon,
    })
}

/// Nearest-rank percentile of the red values (counting sort over 256 bins).
fn red_percentile(r: &GrayImage, pct: f64) -> f64 {
    let mut hist = [0u64; 256];
    for &v in r.data() {
        hist[v as usize] += 1;
    }
    let n = r.data().len() as u64;
    let rank = ((pct / 100.0 * n as f64).ceil() as u64).clamp(1, n);
    let mut seen = 0u64;
    for (v, &c) in hist.iter().enumerate() {
        seen += c;
        if seen >= rank {
            return v as f64;
        }
    }
    255.0
}

/// Adaptive red threshold, tiered by the red-channel contrast.
///
/// Low and medium contrast use a percentile of the red values; high and very
/// high contrast use mean + k*stddev with k = 0.3 and 0.5. Every tier clamps
/// to [20, 35].
pub fn red_threshold(stats: &ChannelStats, r: &GrayImage, cfg: &RoiConfig) -> f64 {
    let t = if stats.stddev < 30.0 {
        red_percentile(r, cfg.percentile)
    } else if stats.stddev < 60.0 {
        stats.mean + 0.3 * stats.stddev
    } else {
        stats.mean + 0.5 * stats.stddev
    };
    t.clamp(T_RED_MIN, T_RED_MAX)
}

/// Nearest-rank percentile of a ratio map via quickselect.
fn ratio_percentile(values: &[f32], pct: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len();
    let rank = ((pct / 100.0 * n as f64).ceil() as usize).clamp(1, n);
    let mut work = values.to_vec();
    let (_, nth, _) = work.select_nth_unstable_by(rank - 1, |a, b| a.total_cmp(b));
    *nth as f64
}

/// Ratio thresholds: the 90th percentile of each map, scaled by the
/// brightness branch of the mean red intensity.
pub fn ratio_thresholds(maps: &RatioMaps, mu_red: f64, cfg: &RoiConfig) -> (f64, f64) {
    let scale = if mu_red > 60.0 {
        cfg.bright_scale
    } else if mu_red < 10.0 {
        cfg.dark_scale
    } else {
        cfg.mid_scale
    };
    let t_rg = ratio_percentile(&maps.rg, 90.0) * scale;
    let t_rb = ratio_percentile(&maps.rb, 90.0) * scale;
    (t_rg, t_rb)
}

/// Raw mask M1: pixels satisfying all three threshold conditions.
pub fn raw_mask(r: &GrayImage, maps: &RatioMaps, th: &RoiThresholds) -> Result<BinaryMask> {
    check_same_dims(r.width(), r.height(), maps.width, maps.height)?;
    let n = r.data().len();
    let mut data = vec![false; n];
    let t_red = th.t_red as f32;
    let t_rg = th.t_rg as f32;
    let t_rb = th.t_rb as f32;
    for i in 0..n {
        data[i] =
            r.data()[i] as f32 >= t_red && maps.rg[i] >= t_rg && maps.rb[i] >= t_rb;
    }
    BinaryMask::from_vec(r.width(), r.height(), data)
}

/// Morphological refinement: close then open with a 5x5 square.
pub fn refine_mask(m1: &BinaryMask) -> BinaryMask {
    let se = StructuringElement::SQUARE5;
    imgcore::morph_open(&imgcore::morph_close(m1, se), se)
}

/// Keep only the largest 8-connected component. Size ties break to the first
/// label in row-major scan order.
pub fn largest_component(m: &BinaryMask) -> Result<BinaryMask> {
    let lm = imgcore::connected_components(m);
    if lm.num_components() == 0 {
        return Err(Error::SegmentationEmpty);
    }
    let mut best = 1u32;
    for l in 2..=lm.num_components() as u32 {
        if lm.size_of(l) > lm.size_of(best) {
            best = l;
        }
    }
    Ok(lm.component_mask(best))
}

/// Full segmentation chain: raw mask, refinement, largest component, hole
/// fill, then masking of the source image.
pub fn extract_roi(img: &RasterImage, cfg: &RoiConfig) -> Result<RoiResult> {
    extract_roi_stages(img, cfg).map(|(result, _)| result)
}

/// Like [`extract_roi`] but also returns the intermediate masks for debugging.
pub fn extract_roi_stages(
    img: &RasterImage,
    cfg: &RoiConfig,
) -> Result<(RoiResult, RoiStages)> {
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::ZeroImageDims);
    }
    let stats = channel_stats(&img.r);
    let maps = ratio_maps(&img.r, &img.g, &img.b, cfg.epsilon)?;
    let t_red = red_threshold(&stats, &img.r, cfg);
    let (t_rg, t_rb) = ratio_thresholds(&maps, stats.mean, cfg);
    let thresholds = RoiThresholds { t_red, t_rg, t_rb };

    let raw = raw_mask(&img.r, &maps, &thresholds)?;
    let refined = refine_mask(&raw);
    let largest = largest_component(&refined)?;
    let mask = imgcore::fill_holes(&largest);
    let roi_image = img.masked(&mask)?;

    let coverage = mask.count_foreground() as f64 / (img.width() * img.height()) as f64;
    let warning = if coverage < cfg.min_coverage {
        Some(SegmentationWarning::TooSmall { coverage })
    } else {
        None
    };

    Ok((
        RoiResult {
            mask,
            roi_image,
            thresholds,
            stats,
            warning,
        },
        RoiStages {
            raw,
            refined,
            largest,
        },
    ))
}
