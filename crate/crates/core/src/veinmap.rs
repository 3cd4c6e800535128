//! Vein extraction: enhancement, binarization, cleaning, edge merge,
//! skeletonization, and minutiae detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{
    self, check_same_dims, BinaryMask, GrayImage, Kernel3x3, StructuringElement,
};
use crate::roiseg::RoiResult;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VeinConfig {
    /// Components below this pixel count are discarded after opening.
    pub min_object_size: usize,
    /// Number of largest components kept before the edge merge.
    pub major_components: usize,
    /// Cap on uniformly sampled skeleton points.
    pub sample_count: usize,
    pub canny_low: f64,
    pub canny_high: f64,
    /// Adaptive mean threshold window (odd).
    pub adaptive_block: usize,
    /// Adaptive mean threshold offset.
    pub adaptive_offset: i32,
    /// CLAHE tile grid per axis.
    pub clahe_tiles: usize,
    /// CLAHE clip limit relative to the mean bin height.
    pub clahe_clip: f64,
}

impl Default for VeinConfig {
    fn default() -> Self {
        VeinConfig {
            min_object_size: 300,
            major_components: 5,
            sample_count: 200,
            canny_low: 50.0,
            canny_high: 150.0,
            adaptive_block: 25,
            adaptive_offset: 2,
            clahe_tiles: 8,
            clahe_clip: 2.0,
        }
    }
}

/// Integer pixel location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub fn new(x: u32, y: u32) -> Self {
        Point { x, y }
    }
}

/// One-pixel-wide skeleton of the vein mask.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub mask: BinaryMask,
}

impl Skeleton {
    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }
}

/// Detected vein minutiae: bifurcation points, endpoints and uniformly
/// sampled skeleton points, with the source image dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinutiaeSet {
    pub bifurcations: Vec<Point>,
    pub endpoints: Vec<Point>,
    pub samples: Vec<Point>,
    pub image_width: usize,
    pub image_height: usize,
}

/// Intermediate rasters of the vein chain, kept for debug emission.
#[derive(Debug, Clone)]
pub struct VeinStages {
    pub enhanced: GrayImage,
    pub binary: BinaryMask,
    pub clean: BinaryMask,
    pub major: BinaryMask,
    pub merged: BinaryMask,
    pub skeleton: Skeleton,
}

/// Invert the red channel (veins are dark in red) and equalize contrast with
/// CLAHE; output is zero outside the ROI mask.
pub fn enhance(roi: &RoiResult, cfg: &VeinConfig) -> GrayImage {
    let inverted = roi.roi_image.r.map(|v| 255 - v);
    let mut enhanced = imgcore::clahe(&inverted, cfg.clahe_tiles, cfg.clahe_clip);
    for (v, &keep) in enhanced.data_mut().iter_mut().zip(roi.mask.data()) {
        if !keep {
            *v = 0;
        }
    }
    enhanced
}

/// Sharpen with the cross kernel (center 5, cross -1) then threshold against
/// the local mean.
pub fn binarize_veins(enhanced: &GrayImage, cfg: &VeinConfig) -> BinaryMask {
    let sharpened = imgcore::convolve3x3(enhanced, &Kernel3x3::sharpen());
    imgcore::adaptive_mean_threshold(&sharpened, cfg.adaptive_block, cfg.adaptive_offset)
}

/// Open with 3x3, drop components below the minimum size, then dilate with
/// 3x3 to reconnect fragments.
pub fn clean_veins(raw: &BinaryMask, cfg: &VeinConfig) -> BinaryMask {
    let se = StructuringElement::SQUARE3;
    let opened = imgcore::morph_open(raw, se);
    let filtered = imgcore::remove_small_objects(&opened, cfg.min_object_size);
    imgcore::dilate(&filtered, se)
}

/// Retain the `n` largest 8-connected components (all when fewer exist).
/// Size ties prefer the earlier label in scan order.
pub fn keep_major_components(m: &BinaryMask, n: usize) -> BinaryMask {
    assert!(n >= 1, "component count must be >= 1");
    let lm = imgcore::connected_components(m);
    let k = lm.num_components();
    if k <= n {
        return m.clone();
    }
    let mut order: Vec<u32> = (1..=k as u32).collect();
    order.sort_by_key(|&l| (std::cmp::Reverse(lm.size_of(l)), l));
    lm.mask_of_labels(&order[..n])
}

/// Union the vein mask with Canny edges of the enhanced image, then clip to
/// the ROI mask.
pub fn merge_edges(
    veins: &BinaryMask,
    enhanced: &GrayImage,
    roi_mask: &BinaryMask,
    cfg: &VeinConfig,
) -> Result<BinaryMask> {
    check_same_dims(veins.width(), veins.height(), enhanced.width(), enhanced.height())?;
    let edges = imgcore::canny(enhanced, cfg.canny_low, cfg.canny_high);
    veins.or(&edges)?.and(roi_mask)
}

pub fn extract_skeleton(m: &BinaryMask) -> Skeleton {
    Skeleton {
        mask: imgcore::skeletonize(m),
    }
}

/// Per-pixel minutia classification from the 8-neighborhood count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelClass {
    /// Exactly one neighbor.
    Endpoint,
    /// More than two neighbors.
    Bifurcation,
    /// Anything else (path pixel or isolated pixel).
    Regular,
}

/// Classify a skeleton pixel by its 8-neighborhood count.
pub fn classify_pixel(sk: &Skeleton, x: usize, y: usize) -> PixelClass {
    if !sk.mask.get(x, y) {
        return PixelClass::Regular;
    }
    let mut count = 0u32;
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if (dx != 0 || dy != 0) && sk.mask.get_checked(x as isize + dx, y as isize + dy) {
                count += 1;
            }
        }
    }
    match count {
        1 => PixelClass::Endpoint,
        c if c > 2 => PixelClass::Bifurcation,
        _ => PixelClass::Regular,
    }
}

/// Raw per-pixel minutiae in scan order, without any clustering.
pub fn raw_minutiae(sk: &Skeleton) -> (Vec<Point>, Vec<Point>) {
    let mut bifurcations = Vec::new();
    let mut endpoints = Vec::new();
    for y in 0..sk.height() {
        for x in 0..sk.width() {
            match classify_pixel(sk, x, y) {
                PixelClass::Bifurcation => bifurcations.push(Point::new(x as u32, y as u32)),
                PixelClass::Endpoint => endpoints.push(Point::new(x as u32, y as u32)),
                PixelClass::Regular => {}
            }
        }
    }
    (bifurcations, endpoints)
}

/// Detect minutiae. Thinning often leaves junctions as small clusters of
/// bifurcation pixels, so 8-connected bifurcation clusters collapse to their
/// centroid, snapped to the nearest cluster member so every reported point
/// stays on the skeleton.
pub fn detect_minutiae(sk: &Skeleton) -> (Vec<Point>, Vec<Point>) {
    let (raw_bifs, endpoints) = raw_minutiae(sk);
    (cluster_points(&raw_bifs), endpoints)
}

fn cluster_points(points: &[Point]) -> Vec<Point> {
    let n = points.len();
    if n <= 1 {
        return points.to_vec();
    }
    let mut cluster = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if cluster[start] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![start];
        cluster[start] = id;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if cluster[j] == usize::MAX && adjacent(points[i], points[j]) {
                    cluster[j] = id;
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }

    clusters
        .iter()
        .map(|members| {
            let cx = members.iter().map(|&i| points[i].x as f64).sum::<f64>()
                / members.len() as f64;
            let cy = members.iter().map(|&i| points[i].y as f64).sum::<f64>()
                / members.len() as f64;
            // Snap to the member nearest the centroid (scan order on ties).
            let mut best = members[0];
            let mut best_d = f64::INFINITY;
            for &i in members {
                let dx = points[i].x as f64 - cx;
                let dy = points[i].y as f64 - cy;
                let d = dx * dx + dy * dy;
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            points[best]
        })
        .collect()
}

#[inline]
fn adjacent(a: Point, b: Point) -> bool {
    let dx = (a.x as i64 - b.x as i64).abs();
    let dy = (a.y as i64 - b.y as i64).abs();
    dx <= 1 && dy <= 1 && (dx | dy) != 0
}

/// Uniformly sample skeleton pixels in row-major order with stride
/// ceil(P/count); all pixels are returned when P <= count.
pub fn sample_skeleton(sk: &Skeleton, count: usize) -> Vec<Point> {
    assert!(count >= 1, "sample count must be >= 1");
    let mut pixels = Vec::new();
    for y in 0..sk.height() {
        for x in 0..sk.width() {
            if sk.mask.get(x, y) {
                pixels.push(Point::new(x as u32, y as u32));
            }
        }
    }
    let p = pixels.len();
    if p <= count {
        return pixels;
    }
    let stride = p.div_ceil(count);
    pixels.into_iter().step_by(stride).collect()
}

/// Full vein chain from a segmented ROI to a minutiae set.
pub fn extract_veins(roi: &RoiResult, cfg: &VeinConfig) -> Result<MinutiaeSet> {
    extract_veins_stages(roi, cfg).map(|(m, _)| m)
}

/// Like [`extract_veins`] but also returns the intermediate rasters.
pub fn extract_veins_stages(
    roi: &RoiResult,
    cfg: &VeinConfig,
) -> Result<(MinutiaeSet, VeinStages)> {
    let enhanced = enhance(roi, cfg);
    let binary = binarize_veins(&enhanced, cfg);
    let clean = clean_veins(&binary, cfg);
    let major = keep_major_components(&clean, cfg.major_components);
    let merged = merge_edges(&major, &enhanced, &roi.mask, cfg)?;
    let skeleton = extract_skeleton(&merged);
    if skeleton.mask.is_empty() {
        return Err(Error::VeinsNotFound);
    }
    let (bifurcations, endpoints) = detect_minutiae(&skeleton);
    let samples = sample_skeleton(&skeleton, cfg.sample_count);
    let set = MinutiaeSet {
        bifurcations,
        endpoints,
        samples,
        image_width: skeleton.width(),
        image_height: skeleton.height(),
    };
    Ok((
        set,
        VeinStages {
            enhanced,
            binary,
            clean,
            major,
            merged,
            skeleton,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skeleton_from_rows(rows: &[&str]) -> Skeleton {
        let h = rows.len();
        let w = rows[0].len();
        Skeleton {
            mask: BinaryMask::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'x'),
        }
    }

    #[test]
    fn three_pixel_line_has_two_endpoints() {
        let sk = skeleton_from_rows(&[".....", ".xxx.", "....."]);
        let (bifs, ends) = detect_minutiae(&sk);
        assert_eq!(bifs.len(), 0);
        assert_eq!(ends.len(), 2);
        assert!(ends.contains(&Point::new(1, 1)));
        assert!(ends.contains(&Point::new(3, 1)));
    }

    #[test]
    fn plus_cross_center_is_bifurcation() {
        let sk = skeleton_from_rows(&[
            "..x..",
            "..x..",
            "xxxxx",
            "..x..",
            "..x..",
        ]);
        let (bifs, ends) = detect_minutiae(&sk);
        // Center has 4 neighbors; the four pixels adjacent to it have 2 each.
        assert_eq!(bifs.len(), 1);
        assert_eq!(bifs[0], Point::new(2, 2));
        assert_eq!(ends.len(), 4);
    }

    #[test]
    fn classification_matches_neighbor_count_oracle() {
        let sk = skeleton_from_rows(&[
            "x...x...",
            ".x.x....",
            "..x.....",
            ".x.xxxx.",
            "x.......",
        ]);
        let (bifs, ends) = raw_minutiae(&sk);
        for y in 0..sk.height() {
            for x in 0..sk.width() {
                if !sk.mask.get(x, y) {
                    continue;
                }
                let mut count = 0;
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        if (dx != 0 || dy != 0)
                            && sk.mask.get_checked(x as isize + dx, y as isize + dy)
                        {
                            count += 1;
                        }
                    }
                }
                let p = Point::new(x as u32, y as u32);
                assert_eq!(ends.contains(&p), count == 1, "({x},{y})");
                assert_eq!(bifs.contains(&p), count > 2, "({x},{y})");
            }
        }
    }

    #[test]
    fn adjacent_bifurcation_cluster_collapses() {
        // Two touching bifurcation pixels must report as one minutia.
        let sk = skeleton_from_rows(&[
            "x...x.",
            ".x.x..",
            "..xx..",
            "..x.x.",
            ".x...x",
        ]);
        let (raw, _) = raw_minutiae(&sk);
        assert!(raw.len() >= 2, "fixture should have a bifurcation cluster");
        let (bifs, _) = detect_minutiae(&sk);
        assert_eq!(bifs.len(), 1);
        assert!(sk.mask.get(bifs[0].x as usize, bifs[0].y as usize));
    }

    #[test]
    fn sampling_stride_rules() {
        // 10 pixels, count 200: all returned.
        let sk = skeleton_from_rows(&["xxxxxxxxxx"]);
        assert_eq!(sample_skeleton(&sk, 200).len(), 10);

        // 400 pixels, count 200: every 2nd pixel in scan order.
        let sk = Skeleton {
            mask: BinaryMask::from_fn(40, 10, |_, _| true),
        };
        let samples = sample_skeleton(&sk, 200);
        assert_eq!(samples.len(), 200);
        assert_eq!(samples[0], Point::new(0, 0));
        assert_eq!(samples[1], Point::new(2, 0));

        // Empty skeleton: empty sample list.
        let sk = Skeleton {
            mask: BinaryMask::new(8, 8),
        };
        assert!(sample_skeleton(&sk, 10).is_empty());
    }

    #[test]
    fn keep_major_components_drops_smallest() {
        let mut m = BinaryMask::new(40, 5);
        // Seven components with sizes 1..=7 (horizontal runs).
        let mut x0 = 0;
        for size in 1..=7usize {
            for x in x0..x0 + size {
                m.set(x, 2, true);
            }
            x0 += size + 2;
        }
        let kept = keep_major_components(&m, 5);
        let lm = imgcore::connected_components(&kept);
        assert_eq!(lm.num_components(), 5);
        assert_eq!(kept.count_foreground(), 3 + 4 + 5 + 6 + 7);

        // Fewer components than requested: unchanged.
        let kept_all = keep_major_components(&m, 50);
        assert_eq!(kept_all, m);
    }

    #[test]
    fn keep_major_tie_prefers_scan_order() {
        let mut m = BinaryMask::new(20, 3);
        m.set(1, 1, true);
        m.set(6, 1, true);
        m.set(12, 1, true);
        let kept = keep_major_components(&m, 2);
        assert!(kept.get(1, 1));
        assert!(kept.get(6, 1));
        assert!(!kept.get(12, 1));
    }

    #[test]
    fn merge_edges_identity_and_masking() {
        let veins = BinaryMask::from_fn(12, 12, |x, y| y == 6 && (2..10).contains(&x));
        let enhanced = GrayImage::constant(12, 12, 100); // no edges
        let mut roi_mask = BinaryMask::from_fn(12, 12, |_, _| true);
        roi_mask.set(9, 6, false);
        let cfg = VeinConfig::default();
        let merged = merge_edges(&veins, &enhanced, &roi_mask, &cfg).unwrap();
        // Canny of a constant image is empty, so merge = veins AND roi.
        assert!(!merged.get(9, 6));
        assert!(merged.get(2, 6));
        assert_eq!(merged.count_foreground(), 7);
    }
}
