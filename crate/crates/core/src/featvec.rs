//! Fixed 68-dimensional feature vector over a minutiae set.
//!
//! Layout: [N_B, N_E | mu_B, sigma_B | mu_E, sigma_E | x_mean, x_std,
//! y_mean, y_std | angle_hist[8] | density_hist[50]]. Point coordinates are
//! normalized by the image dimensions before any statistic is computed, so
//! the vector is invariant under uniform rescaling of image and points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::veinmap::MinutiaeSet;

pub const FEATURE_LEN: usize = 68;

/// Group offsets within the vector.
pub const OFFSET_COUNTS: usize = 0;
pub const OFFSET_BIF_STATS: usize = 2;
pub const OFFSET_END_STATS: usize = 4;
pub const OFFSET_COORD_STATS: usize = 6;
pub const OFFSET_ANGLE_HIST: usize = 10;
pub const OFFSET_DENSITY_HIST: usize = 18;

pub const ANGLE_BINS: usize = 8;
pub const DENSITY_GRID: usize = 10;
pub const DENSITY_KEPT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_LEN {
            return Err(Error::FeatureLength {
                expected: FEATURE_LEN,
                found: values.len(),
            });
        }
        Ok(FeatureVector { values })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn angle_hist(&self) -> &[f64] {
        &self.values[OFFSET_ANGLE_HIST..OFFSET_ANGLE_HIST + ANGLE_BINS]
    }

    pub fn density_hist(&self) -> &[f64] {
        &self.values[OFFSET_DENSITY_HIST..OFFSET_DENSITY_HIST + DENSITY_KEPT]
    }
}

/// Mean/stddev of pairwise point distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub mean_dist: f64,
    pub std_dist: f64,
}

/// Population mean and standard deviation over all unordered pairs i<j.
/// Fewer than two points yields (0, 0).
pub fn pairwise_distance_stats(pts: &[(f64, f64)]) -> PointStats {
    let n = pts.len();
    if n < 2 {
        return PointStats {
            mean_dist: 0.0,
            std_dist: 0.0,
        };
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let dx = pts[i].0 - pts[j].0;
            let dy = pts[i].1 - pts[j].1;
            let d = (dx * dx + dy * dy).sqrt();
            sum += d;
            sum_sq += d * d;
            count += 1;
        }
    }
    let mean = sum / count as f64;
    let var = (sum_sq / count as f64 - mean * mean).max(0.0);
    PointStats {
        mean_dist: mean,
        std_dist: var.sqrt(),
    }
}

/// L1-normalized histogram of atan2 angles over all ordered pairs i != j.
/// Eight equal bins over (-pi, pi]; the last bin is closed at pi so atan2's
/// full range maps. Fewer than two points yields all zeros.
pub fn angle_histogram(pts: &[(f64, f64)]) -> [f64; ANGLE_BINS] {
    let mut hist = [0.0f64; ANGLE_BINS];
    let n = pts.len();
    if n < 2 {
        return hist;
    }
    let bin_width = 2.0 * std::f64::consts::PI / ANGLE_BINS as f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let theta = (pts[j].1 - pts[i].1).atan2(pts[j].0 - pts[i].0);
            let idx = (((theta + std::f64::consts::PI) / bin_width).floor() as isize)
                .clamp(0, ANGLE_BINS as isize - 1) as usize;
            hist[idx] += 1.0;
        }
    }
    let total: f64 = hist.iter().sum();
    for h in hist.iter_mut() {
        *h /= total;
    }
    hist
}

/// Per-axis population mean and stddev; empty input yields zeros.
pub fn coordinate_stats(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = pts.len();
    if n == 0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let nf = n as f64;
    let x_mean = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let x_var = pts.iter().map(|p| (p.0 - x_mean) * (p.0 - x_mean)).sum::<f64>() / nf;
    let y_var = pts.iter().map(|p| (p.1 - y_mean) * (p.1 - y_mean)).sum::<f64>() / nf;
    (x_mean, x_var.sqrt(), y_mean, y_var.sqrt())
}

/// 10x10 spatial density histogram over the unit square, L1-normalized over
/// all 100 bins, flattened row-major (index gy*10+gx); only the first 50
/// entries (rows with y in [0, 0.5)) are returned.
pub fn density_histogram(pts: &[(f64, f64)]) -> [f64; DENSITY_KEPT] {
    let mut full = [0.0f64; DENSITY_GRID * DENSITY_GRID];
    for &(x, y) in pts {
        let gx = ((x * DENSITY_GRID as f64).floor() as isize).clamp(0, DENSITY_GRID as isize - 1)
            as usize;
        let gy = ((y * DENSITY_GRID as f64).floor() as isize).clamp(0, DENSITY_GRID as isize - 1)
            as usize;
        full[gy * DENSITY_GRID + gx] += 1.0;
    }
    let total: f64 = full.iter().sum();
    let mut out = [0.0f64; DENSITY_KEPT];
    if total > 0.0 {
        for (o, f) in out.iter_mut().zip(full.iter()) {
            *o = f / total;
        }
    }
    out
}

fn normalize(points: &[crate::veinmap::Point], w: f64, h: f64) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|p| (p.x as f64 / w, p.y as f64 / h))
        .collect()
}

/// Assemble the 68-dimensional vector from a minutiae set.
pub fn assemble(m: &MinutiaeSet) -> Result<FeatureVector> {
    if m.image_width == 0 || m.image_height == 0 {
        return Err(Error::ZeroImageDims);
    }
    let w = m.image_width as f64;
    let h = m.image_height as f64;
    let bifs = normalize(&m.bifurcations, w, h);
    let ends = normalize(&m.endpoints, w, h);
    let samples = normalize(&m.samples, w, h);

    let bif_stats = pairwise_distance_stats(&bifs);
    let end_stats = pairwise_distance_stats(&ends);
    let (x_mean, x_std, y_mean, y_std) = coordinate_stats(&samples);
    let angles = angle_histogram(&bifs);
    let density = density_histogram(&samples);

    let mut values = Vec::with_capacity(FEATURE_LEN);
    values.push(bifs.len() as f64);
    values.push(ends.len() as f64);
    values.push(bif_stats.mean_dist);
    values.push(bif_stats.std_dist);
    values.push(end_stats.mean_dist);
    values.push(end_stats.std_dist);
    values.extend_from_slice(&[x_mean, x_std, y_mean, y_std]);
    values.extend_from_slice(&angles);
    values.extend_from_slice(&density);
    FeatureVector::from_values(values)
}

/// Serialized feature record: the 68 values plus provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pig_id: Option<String>,
    pub source: String,
    pub layout_version: u32,
    pub features: Vec<f64>,
}

pub const LAYOUT_VERSION: u32 = 1;

impl FeatureRecord {
    pub fn new(pig_id: Option<String>, source: impl Into<String>, fv: &FeatureVector) -> Self {
        FeatureRecord {
            pig_id,
            source: source.into(),
            layout_version: LAYOUT_VERSION,
            features: fv.values().to_vec(),
        }
    }

    pub fn feature_vector(&self) -> Result<FeatureVector> {
        if self.layout_version != LAYOUT_VERSION {
            return Err(Error::UnsupportedVersion {
                expected: LAYOUT_VERSION,
                found: self.layout_version,
            });
        }
        FeatureVector::from_values(self.features.clone())
    }
}

/// CSV header: 68 feature columns then the id.
pub fn csv_header() -> String {
    let mut cols: Vec<String> = (0..FEATURE_LEN).map(|i| format!("f{i:02}")).collect();
    cols.push("pig_id".to_string());
    cols.join(",")
}

/// One CSV row: 68 values then the id.
pub fn csv_row(fv: &FeatureVector, pig_id: &str) -> String {
    let mut cols: Vec<String> = fv.values().iter().map(|v| format!("{v}")).collect();
    cols.push(pig_id.to_string());
    cols.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::veinmap::Point;

    #[test]
    fn single_pair_distance() {
        let s = pairwise_distance_stats(&[(0.0, 0.0), (0.3, 0.4)]);
        assert!((s.mean_dist - 0.5).abs() < 1e-12);
        assert_eq!(s.std_dist, 0.0);
    }

    #[test]
    fn degenerate_point_sets() {
        let s = pairwise_distance_stats(&[(0.2, 0.3)]);
        assert_eq!(s.mean_dist, 0.0);
        assert_eq!(s.std_dist, 0.0);
        let s = pairwise_distance_stats(&[]);
        assert_eq!(s.mean_dist, 0.0);
    }

    #[test]
    fn triangle_distance_stats_match_brute_force() {
        // Distances 1, 1, sqrt(2): mean = (2+sqrt2)/3, population stddev.
        let s = pairwise_distance_stats(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!((s.mean_dist - 1.138_071_187_457_698).abs() < 1e-9, "{}", s.mean_dist);
        assert!((s.std_dist - 0.195_262_145_875_635).abs() < 1e-9, "{}", s.std_dist);
    }

    #[test]
    fn angle_histogram_two_points() {
        // Ordered pairs give angles 0 and pi: bins 4 and 7.
        let h = angle_histogram(&[(0.0, 0.0), (1.0, 0.0)]);
        let expect = [0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5];
        for (a, e) in h.iter().zip(expect.iter()) {
            assert!((a - e).abs() < 1e-12, "{h:?}");
        }
    }

    #[test]
    fn angle_histogram_degenerate_is_zero() {
        assert_eq!(angle_histogram(&[(0.1, 0.1)]), [0.0; 8]);
        assert_eq!(angle_histogram(&[]), [0.0; 8]);
    }

    #[test]
    fn angle_histogram_axis_aligned_square_enumeration() {
        // Enumerating the 12 ordered pairs by hand: angles 0 (x2), pi/4,
        // pi/2 (x2), 3pi/4, pi (x2), -3pi/4, -pi/2 (x2), -pi/4. With bins of
        // width pi/4 over (-pi, pi] and pi landing in the last bin, that is
        // bins [0,1,2,1,2,1,2,3]/12.
        let h = angle_histogram(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let expect = [0.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 3.0].map(|c| c / 12.0);
        for (a, e) in h.iter().zip(expect.iter()) {
            assert!((a - e).abs() < 1e-12, "{h:?}");
        }
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_histogram_tilted_square_symmetric_under_half_turn() {
        // Rotating the direction by pi is an index shift of 4 bins. A tilted
        // square keeps all pair angles off the bin boundaries, so the
        // symmetry of its ordered-pair multiset is exact.
        let th = 0.3f64;
        let rot = |x: f64, y: f64| (x * th.cos() - y * th.sin(), x * th.sin() + y * th.cos());
        let h = angle_histogram(&[
            rot(0.0, 0.0),
            rot(1.0, 0.0),
            rot(1.0, 1.0),
            rot(0.0, 1.0),
        ]);
        for k in 0..4 {
            assert!((h[k] - h[k + 4]).abs() < 1e-12, "{h:?}");
        }
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coordinate_stats_examples() {
        let (xm, xs, ym, ys) = coordinate_stats(&[(0.0, 0.0), (0.5, 0.5)]);
        assert!((xm - 0.25).abs() < 1e-12);
        assert!((xs - 0.25).abs() < 1e-12);
        assert!((ym - 0.25).abs() < 1e-12);
        assert!((ys - 0.25).abs() < 1e-12);

        let (xm, xs, ym, ys) = coordinate_stats(&[(0.2, 0.7)]);
        assert_eq!((xm, xs, ym, ys), (0.2, 0.0, 0.7, 0.0));
    }

    #[test]
    fn coordinate_stats_match_two_pass_oracle() {
        let pts: Vec<(f64, f64)> = (0..100)
            .map(|i| {
                let a = (i * 37 % 101) as f64 / 101.0;
                let b = (i * 53 % 97) as f64 / 97.0;
                (a, b)
            })
            .collect();
        let (xm, xs, ym, ys) = coordinate_stats(&pts);
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let vx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / n;
        let vy = pts.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / n;
        assert!((xm - mx).abs() < 1e-9);
        assert!((xs - vx.sqrt()).abs() < 1e-9);
        assert!((ym - my).abs() < 1e-9);
        assert!((ys - vy.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn density_all_points_in_first_cell() {
        let pts = vec![(0.01, 0.01), (0.05, 0.03), (0.09, 0.09)];
        let d = density_histogram(&pts);
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!(d[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn density_empty_is_zero() {
        assert_eq!(density_histogram(&[]), [0.0; 50]);
    }

    #[test]
    fn density_truncation_drops_bottom_half() {
        // All points at y >= 0.5: the 50 retained entries are zero even
        // though the full histogram summed to 1 before truncation.
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 / 20.0, 0.75)).collect();
        let d = density_histogram(&pts);
        assert!(d.iter().all(|&v| v == 0.0));

        // Direct binning check of the pre-truncation sum.
        let mut full = [0.0f64; 100];
        for &(x, y) in &pts {
            let gx = ((x * 10.0).floor() as usize).min(9);
            let gy = ((y * 10.0).floor() as usize).min(9);
            full[gy * 10 + gx] += 1.0;
        }
        let total: f64 = full.iter().sum();
        assert_eq!(total, 20.0);
    }

    fn empty_set() -> MinutiaeSet {
        MinutiaeSet {
            bifurcations: vec![],
            endpoints: vec![],
            samples: vec![],
            image_width: 100,
            image_height: 80,
        }
    }

    #[test]
    fn assemble_empty_set_is_all_zero() {
        let fv = assemble(&empty_set()).unwrap();
        assert_eq!(fv.values().len(), FEATURE_LEN);
        assert!(fv.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn assemble_zero_dims_errors() {
        let mut m = empty_set();
        m.image_width = 0;
        assert!(assemble(&m).is_err());
    }

    #[test]
    fn assemble_counts_and_layout() {
        let m = MinutiaeSet {
            bifurcations: vec![Point::new(10, 10), Point::new(50, 40), Point::new(90, 70)],
            endpoints: (0..7).map(|i| Point::new(i * 10, i * 8)).collect(),
            samples: (0..30).map(|i| Point::new(i * 3, 79 - (i % 20))).collect(),
            image_width: 100,
            image_height: 80,
        };
        let fv = assemble(&m).unwrap();
        assert_eq!(fv.values().len(), FEATURE_LEN);
        assert_eq!(fv.values()[OFFSET_COUNTS], 3.0);
        assert_eq!(fv.values()[OFFSET_COUNTS + 1], 7.0);

        // Independent recomputation of each group.
        let bifs: Vec<(f64, f64)> = m
            .bifurcations
            .iter()
            .map(|p| (p.x as f64 / 100.0, p.y as f64 / 80.0))
            .collect();
        let s = pairwise_distance_stats(&bifs);
        assert_eq!(fv.values()[OFFSET_BIF_STATS], s.mean_dist);
        assert_eq!(fv.values()[OFFSET_BIF_STATS + 1], s.std_dist);
        let angles = angle_histogram(&bifs);
        assert_eq!(fv.angle_hist(), &angles[..]);
        assert!((fv.angle_hist().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translation_leaves_distance_and_angle_groups() {
        let base = MinutiaeSet {
            bifurcations: vec![Point::new(10, 10), Point::new(30, 25), Point::new(22, 40)],
            endpoints: vec![Point::new(5, 5), Point::new(60, 50)],
            samples: (0..10).map(|i| Point::new(10 + i * 4, 12 + i * 3)).collect(),
            image_width: 200,
            image_height: 200,
        };
        let shift = |m: &MinutiaeSet, dx: u32, dy: u32| MinutiaeSet {
            bifurcations: m.bifurcations.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
            endpoints: m.endpoints.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
            samples: m.samples.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
            ..*m
        };
        let a = assemble(&base).unwrap();
        let b = assemble(&shift(&base, 40, 60)).unwrap();
        for i in OFFSET_BIF_STATS..OFFSET_COORD_STATS {
            assert!((a.values()[i] - b.values()[i]).abs() < 1e-12, "i={i}");
        }
        for i in OFFSET_ANGLE_HIST..OFFSET_DENSITY_HIST {
            assert!((a.values()[i] - b.values()[i]).abs() < 1e-12, "i={i}");
        }
        // Coordinate means move by the normalized shift.
        assert!((b.values()[OFFSET_COORD_STATS] - a.values()[OFFSET_COORD_STATS] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn uniform_scaling_leaves_entire_vector() {
        let base = MinutiaeSet {
            bifurcations: vec![Point::new(10, 10), Point::new(30, 25), Point::new(22, 40)],
            endpoints: vec![Point::new(5, 5), Point::new(60, 50)],
            samples: (0..12).map(|i| Point::new(8 + i * 5, 6 + i * 4)).collect(),
            image_width: 100,
            image_height: 80,
        };
        let scaled = MinutiaeSet {
            bifurcations: base.bifurcations.iter().map(|p| Point::new(p.x * 3, p.y * 3)).collect(),
            endpoints: base.endpoints.iter().map(|p| Point::new(p.x * 3, p.y * 3)).collect(),
            samples: base.samples.iter().map(|p| Point::new(p.x * 3, p.y * 3)).collect(),
            image_width: 300,
            image_height: 240,
        };
        let a = assemble(&base).unwrap();
        let b = assemble(&scaled).unwrap();
        for i in 0..FEATURE_LEN {
            assert!((a.values()[i] - b.values()[i]).abs() < 1e-12, "i={i}");
        }
    }

    #[test]
    fn angle_histogram_invariant_under_relabeling() {
        let pts = [(0.1, 0.2), (0.8, 0.3), (0.4, 0.9), (0.6, 0.6)];
        let mut shuffled = pts;
        shuffled.swap(0, 3);
        shuffled.swap(1, 2);
        assert_eq!(angle_histogram(&pts), angle_histogram(&shuffled));
    }
}
