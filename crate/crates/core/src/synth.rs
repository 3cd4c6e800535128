//! Synthetic backlit ear generator with exact ground truth.
//!
//! Every pig template carries an ellipse-like ear outline and a branching
//! vein tree built in the ear's local frame; endpoint and bifurcation counts
//! are recorded at construction time, before any rasterization. Rendering
//! paints a red-dominant ear interior on a darker neutral background, darkens
//! all three channels along the tree strokes (preserving the red ratios the
//! segmenter keys on), brightens the red rim slightly so the ear boundary
//! stays quiet under local contrast equalization, and adds seeded Gaussian
//! noise plus brightness/rotation jitter.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imgcore::{io, BinaryMask, RasterImage};

/// Ellipse-like closed contour in normalized image coordinates. The radial
/// wobble keeps outlines organic and distinct between pigs.
#[derive(Debug, Clone, PartialEq)]
pub struct EarOutline {
    pub center: (f64, f64),
    /// Semi-axes in units of min(width, height).
    pub semi_axes: (f64, f64),
    pub rotation: f64,
    pub wobble_amp: f64,
    pub wobble_freq: u32,
    pub wobble_phase: f64,
}

impl EarOutline {
    /// Boundary radius multiplier at parametric angle phi.
    #[inline]
    pub fn boundary(&self, phi: f64) -> f64 {
        1.0 + self.wobble_amp * (self.wobble_freq as f64 * phi + self.wobble_phase).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeSegment {
    pub from: usize,
    pub to: usize,
    /// Stroke width in units of min(width, height).
    pub width: f64,
}

/// Branching vein tree in the ear's local frame (same units as the outline
/// semi-axes). Ground-truth minutiae counts come from node degrees: degree 1
/// is an endpoint, degree >= 3 a bifurcation.
#[derive(Debug, Clone, PartialEq)]
pub struct VeinTree {
    pub nodes: Vec<(f64, f64)>,
    pub segments: Vec<TreeSegment>,
    pub n_endpoints: usize,
    pub n_bifurcations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PigTemplate {
    pub seed: u64,
    pub outline: EarOutline,
    pub tree: VeinTree,
}

impl PigTemplate {
    pub fn n_endpoints(&self) -> usize {
        self.tree.n_endpoints
    }

    pub fn n_bifurcations(&self) -> usize {
        self.tree.n_bifurcations
    }

    /// Preorder encoding of branch counts, quantized headings and lengths;
    /// distinct trees get distinct signatures with high probability.
    pub fn topology_signature(&self) -> String {
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.tree.nodes.len()];
        for seg in &self.tree.segments {
            children[seg.from].push(seg.to);
        }
        let mut out = String::new();
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            let (x, y) = self.tree.nodes[node];
            out.push_str(&format!(
                "({}:{:.0},{:.0}",
                children[node].len(),
                x * 100.0,
                y * 100.0
            ));
            out.push(')');
            for &c in children[node].iter().rev() {
                stack.push(c);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    /// Additive Gaussian noise per channel.
    pub noise_sigma: f64,
    /// Multiplicative brightness jitter (fraction, +-).
    pub brightness_jitter: f64,
    /// Rotation jitter in degrees (+-).
    pub rotation_jitter: f64,
    /// Neutral background red level; green/blue sit slightly above it so
    /// background red ratios stay below 1.
    pub background_level: u8,
    /// Red level of the ear interior.
    pub ear_level: u8,
    /// Multiplier on the template semi-axes (and stroke widths).
    pub ear_scale: f64,
    /// Ear green = red * green_frac, blue = red * blue_frac.
    pub green_frac: f64,
    pub blue_frac: f64,
    /// Channel multiplier along vein strokes.
    pub vein_factor: f64,
    /// Red boost toward the rim and the rim band width (fraction of radius).
    pub rim_gain: f64,
    pub rim_frac: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig::low_noise(1024, 768)
    }
}

impl RenderConfig {
    /// Clean capture conditions: medium brightness, high-contrast tier.
    /// The rim saturates toward 255 (strong backlight bleed at the thin ear
    /// edge), which keeps the contrast-equalized boundary dark and quiet for
    /// the edge detector.
    pub fn low_noise(width: usize, height: usize) -> Self {
        RenderConfig {
            width,
            height,
            noise_sigma: 2.0,
            brightness_jitter: 0.04,
            rotation_jitter: 2.0,
            background_level: 12,
            ear_level: 140,
            ear_scale: 1.0,
            green_frac: 0.32,
            blue_frac: 0.27,
            vein_factor: 0.45,
            rim_gain: 1.9,
            rim_frac: 0.12,
        }
    }

    /// Degraded capture conditions: heavier noise and jitter.
    pub fn high_noise(width: usize, height: usize) -> Self {
        RenderConfig {
            noise_sigma: 8.0,
            brightness_jitter: 0.22,
            rotation_jitter: 6.0,
            ..RenderConfig::low_noise(width, height)
        }
    }
}

/// Red-channel contrast tiers of the segmenter's threshold scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContrastTier {
    /// sigma < 10
    Low,
    /// 10 <= sigma < 30
    Medium,
    /// 30 <= sigma < 60
    High,
    /// sigma >= 60
    VeryHigh,
}

/// Mean-red brightness branches of the ratio-threshold scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrightnessBranch {
    /// mu < 10
    Dark,
    /// 10 <= mu <= 60
    Mid,
    /// mu > 60
    Bright,
}

pub fn tier_of(sigma: f64) -> ContrastTier {
    if sigma < 10.0 {
        ContrastTier::Low
    } else if sigma < 30.0 {
        ContrastTier::Medium
    } else if sigma < 60.0 {
        ContrastTier::High
    } else {
        ContrastTier::VeryHigh
    }
}

pub fn branch_of(mu: f64) -> BrightnessBranch {
    if mu < 10.0 {
        BrightnessBranch::Dark
    } else if mu > 60.0 {
        BrightnessBranch::Bright
    } else {
        BrightnessBranch::Mid
    }
}

impl RenderConfig {
    /// Preset hitting a given (contrast tier, brightness branch) cell.
    /// Returns None for cells that are unreachable for [0,255] data: a mean
    /// below 10 caps the standard deviation at sqrt(mu*(255-mu)) < 50, and a
    /// mean above 60 cannot coexist with sigma < 10 when the background must
    /// stay below the red threshold.
    pub fn tier_preset(
        tier: ContrastTier,
        branch: BrightnessBranch,
        width: usize,
        height: usize,
    ) -> Option<RenderConfig> {
        use BrightnessBranch as B;
        use ContrastTier as T;
        // IoU-oriented presets: a modest rim keeps the brightness statistics
        // on their calibrated tier targets.
        let base = |ear: u8, bg: u8, scale: f64, noise: f64, gfrac: f64| RenderConfig {
            noise_sigma: noise,
            background_level: bg,
            ear_level: ear,
            ear_scale: scale,
            green_frac: gfrac,
            blue_frac: gfrac - 0.05,
            rim_gain: 1.18,
            rim_frac: 0.10,
            ..RenderConfig::low_noise(width, height)
        };
        match (tier, branch) {
            (T::Low, B::Dark) => Some(base(34, 5, 1.0, 1.5, 0.40)),
            (T::Low, B::Mid) => Some(base(40, 12, 1.0, 1.5, 0.36)),
            (T::Medium, B::Dark) => Some(base(60, 4, 1.0, 2.0, 0.36)),
            (T::Medium, B::Mid) => Some(base(75, 12, 1.0, 2.0, 0.34)),
            (T::High, B::Mid) => Some(base(140, 12, 1.0, 2.0, 0.32)),
            (T::High, B::Bright) => Some(base(120, 20, 2.3, 2.0, 0.32)),
            (T::VeryHigh, B::Mid) => Some(base(220, 8, 1.4, 2.0, 0.30)),
            (T::VeryHigh, B::Bright) => Some(base(245, 9, 1.75, 2.0, 0.30)),
            _ => None,
        }
    }

    /// All reachable (tier, branch) presets.
    pub fn feasible_tier_presets(
        width: usize,
        height: usize,
    ) -> Vec<(ContrastTier, BrightnessBranch, RenderConfig)> {
        use BrightnessBranch as B;
        use ContrastTier as T;
        let tiers = [T::Low, T::Medium, T::High, T::VeryHigh];
        let branches = [B::Dark, B::Mid, B::Bright];
        let mut out = Vec::new();
        for &t in &tiers {
            for &b in &branches {
                if let Some(cfg) = RenderConfig::tier_preset(t, b, width, height) {
                    out.push((t, b, cfg));
                }
            }
        }
        out
    }
}

use crate::derive_seed;

struct TreeBuilder {
    rng: ChaCha8Rng,
    outline: EarOutline,
    nodes: Vec<(f64, f64)>,
    segments: Vec<TreeSegment>,
}

impl TreeBuilder {
    /// Radius fraction limit keeping strokes clear of the rim band.
    const SAFE_RADIUS: f64 = 0.74;
    /// Minimum clearance between non-incident strokes (min-dim units):
    /// comfortably above stroke width plus the 3x3 dilation of the cleaner.
    const MIN_SEPARATION: f64 = 0.022;
    const MIN_BRANCH_LEN: f64 = 0.032;

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    fn inside_safe(&self, p: (f64, f64)) -> bool {
        let (a, b) = self.outline.semi_axes;
        let phi = (p.1 / b).atan2(p.0 / a);
        let rho = ((p.0 / a).powi(2) + (p.1 / b).powi(2)).sqrt();
        rho <= Self::SAFE_RADIUS * self.outline.boundary(phi)
    }

    fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
        let ab = (b.0 - a.0, b.1 - a.1);
        let ap = (p.0 - a.0, p.1 - a.1);
        let len2 = ab.0 * ab.0 + ab.1 * ab.1;
        let t = if len2 > 0.0 {
            ((ap.0 * ab.0 + ap.1 * ab.1) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = (a.0 + t * ab.0, a.1 + t * ab.1);
        ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
    }

    /// Minimum sampled distance from the candidate stroke to every stroke not
    /// incident to `from_node`.
    fn clearance(&self, from_node: usize, p0: (f64, f64), p1: (f64, f64)) -> f64 {
        let mut min_d = f64::INFINITY;
        for seg in &self.segments {
            if seg.from == from_node || seg.to == from_node {
                continue;
            }
            let a = self.nodes[seg.from];
            let b = self.nodes[seg.to];
            for k in 0..=8 {
                let t = k as f64 / 8.0;
                let q = (p0.0 + t * (p1.0 - p0.0), p0.1 + t * (p1.1 - p0.1));
                min_d = min_d.min(Self::segment_distance(q, a, b));
            }
        }
        min_d
    }

    fn grow(&mut self, node: usize, heading: f64, length: f64, width: f64, depth: u32) {
        if depth == 0 || length < Self::MIN_BRANCH_LEN {
            return;
        }
        let n_children = if depth >= 2 && self.rng.gen_bool(0.30) {
            3
        } else {
            2
        };
        let spreads: Vec<f64> = match n_children {
            3 => {
                let u1 = self.uniform(0.55, 0.80);
                let u2 = self.uniform(0.55, 0.80);
                let mid = self.uniform(-0.10, 0.10);
                vec![-u1, mid, u2]
            }
            _ => {
                let u1 = self.uniform(0.30, 0.55);
                let u2 = self.uniform(0.30, 0.55);
                vec![-u1, u2]
            }
        };
        for off in spreads {
            let child_len = length * self.uniform(0.60, 0.74);
            let child_width = (width * 0.82).max(0.0042);
            self.add_branch(node, heading + off, child_len, child_width, depth - 1);
        }
    }

    fn add_branch(&mut self, from: usize, heading: f64, length: f64, width: f64, depth: u32) {
        let p0 = self.nodes[from];
        // Deterministic retry ladder: small heading nudges, then shrinkage.
        for (d_heading, shrink) in [
            (0.0, 1.0),
            (0.14, 1.0),
            (-0.14, 1.0),
            (0.26, 0.85),
            (-0.26, 0.85),
            (0.0, 0.70),
        ] {
            let h = heading + d_heading;
            let len = length * shrink;
            if len < Self::MIN_BRANCH_LEN {
                continue;
            }
            let p1 = (p0.0 + len * h.cos(), p0.1 + len * h.sin());
            if !self.inside_safe(p1) {
                continue;
            }
            if self.clearance(from, p0, p1) < Self::MIN_SEPARATION {
                continue;
            }
            let to = self.nodes.len();
            self.nodes.push(p1);
            self.segments.push(TreeSegment { from, to, width });
            self.grow(to, h, len, width, depth);
            return;
        }
    }
}

/// Build a pig template. Deterministic per seed.
pub fn make_template(seed: u64) -> PigTemplate {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xea5));
    let outline = EarOutline {
        center: (
            0.5 + rng.gen_range(-0.03..0.03),
            0.5 + rng.gen_range(-0.03..0.03),
        ),
        semi_axes: (rng.gen_range(0.22..0.26), rng.gen_range(0.14..0.17)),
        rotation: rng.gen_range(-0.26..0.26),
        wobble_amp: rng.gen_range(0.02..0.05),
        wobble_freq: if rng.gen_bool(0.5) { 2 } else { 3 },
        wobble_phase: rng.gen_range(0.0..2.0 * PI),
    };

    let (a, _) = outline.semi_axes;
    let root = (
        -0.58 * a + rng.gen_range(-0.03..0.03) * a,
        rng.gen_range(-0.12..0.12) * outline.semi_axes.1,
    );
    let trunk_heading = rng.gen_range(-0.22..0.22);
    let trunk_len = a * rng.gen_range(0.42..0.52);
    let depth = if rng.gen_bool(0.5) { 3 } else { 2 };

    let mut builder = TreeBuilder {
        rng,
        outline: outline.clone(),
        nodes: vec![root],
        segments: Vec::new(),
    };
    builder.add_branch(0, trunk_heading, trunk_len, 0.0066, depth);

    let mut degree = vec![0usize; builder.nodes.len()];
    for seg in &builder.segments {
        degree[seg.from] += 1;
        degree[seg.to] += 1;
    }
    let n_endpoints = degree.iter().filter(|&&d| d == 1).count();
    let n_bifurcations = degree.iter().filter(|&&d| d >= 3).count();

    PigTemplate {
        seed,
        outline,
        tree: VeinTree {
            nodes: builder.nodes,
            segments: builder.segments,
            n_endpoints,
            n_bifurcations,
        },
    }
}

/// Ground truth attached to a rendered image.
#[derive(Debug, Clone)]
pub struct RenderTruth {
    pub ear_mask: BinaryMask,
    pub n_endpoints: usize,
    pub n_bifurcations: usize,
}

#[inline]
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Render a template. Deterministic for fixed (template, config, seed).
pub fn render(t: &PigTemplate, cfg: &RenderConfig, instance_seed: u64) -> (RasterImage, RenderTruth) {
    let (w, h) = (cfg.width, cfg.height);
    let mind = w.min(h) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(t.seed, instance_seed));

    let beta = 1.0 + cfg.brightness_jitter * rng.gen_range(-1.0..1.0f64);
    let theta = t.outline.rotation
        + (cfg.rotation_jitter.to_radians()) * rng.gen_range(-1.0..1.0f64);
    let (sin_t, cos_t) = theta.sin_cos();

    let cx = t.outline.center.0 * w as f64;
    let cy = t.outline.center.1 * h as f64;
    let a_px = t.outline.semi_axes.0 * cfg.ear_scale * mind;
    let b_px = t.outline.semi_axes.1 * cfg.ear_scale * mind;

    // Stroke factor buffer, stamped segment by segment.
    let mut stroke = vec![1.0f32; w * h];
    let to_px = |p: (f64, f64)| -> (f64, f64) {
        let sx = p.0 * cfg.ear_scale * mind;
        let sy = p.1 * cfg.ear_scale * mind;
        (
            cx + sx * cos_t - sy * sin_t,
            cy + sx * sin_t + sy * cos_t,
        )
    };
    for seg in &t.tree.segments {
        let p0 = to_px(t.tree.nodes[seg.from]);
        let p1 = to_px(t.tree.nodes[seg.to]);
        let len = ((p1.0 - p0.0).powi(2) + (p1.1 - p0.1).powi(2)).sqrt();
        let radius = (seg.width * cfg.ear_scale * mind / 2.0).max(1.0);
        let steps = (len / 0.5).ceil() as usize + 1;
        for s in 0..=steps {
            let tt = s as f64 / steps as f64;
            let qx = p0.0 + tt * (p1.0 - p0.0);
            let qy = p0.1 + tt * (p1.1 - p0.1);
            let r_i = radius.ceil() as isize;
            for dy in -r_i..=r_i {
                for dx in -r_i..=r_i {
                    let px = qx.round() as isize + dx;
                    let py = qy.round() as isize + dy;
                    if px < 0 || py < 0 || px >= w as isize || py >= h as isize {
                        continue;
                    }
                    let ddx = px as f64 - qx;
                    let ddy = py as f64 - qy;
                    if ddx * ddx + ddy * ddy <= radius * radius {
                        stroke[py as usize * w + px as usize] = cfg.vein_factor as f32;
                    }
                }
            }
        }
    }

    let mut img = RasterImage::new(w, h);
    let mut ear_mask = BinaryMask::new(w, h);
    let noise = if cfg.noise_sigma > 0.0 {
        Some(Normal::new(0.0f64, cfg.noise_sigma).expect("sigma > 0"))
    } else {
        None
    };
    let bg_r = cfg.background_level as f64;
    let bg_gb = (cfg.background_level as f64 + 4.0).min(255.0);

    for y in 0..h {
        for x in 0..w {
            // Local ear frame.
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let u = dx * cos_t + dy * sin_t;
            let v = -dx * sin_t + dy * cos_t;
            let phi = (v / b_px).atan2(u / a_px);
            let rho = ((u / a_px).powi(2) + (v / b_px).powi(2)).sqrt();
            let boundary = t.outline.boundary(phi);
            let inside = rho <= boundary;

            let (mut r, mut g, mut b);
            if inside {
                ear_mask.set(x, y, true);
                let tt = rho / boundary;
                let rim = 1.0
                    + (cfg.rim_gain - 1.0)
                        * smoothstep((tt - (1.0 - cfg.rim_frac)) / cfg.rim_frac);
                let base = cfg.ear_level as f64 * beta;
                r = base * rim;
                g = base * cfg.green_frac;
                b = base * cfg.blue_frac;
                let f = stroke[y * w + x] as f64;
                r *= f;
                g *= f;
                b *= f;
            } else {
                r = bg_r * beta;
                g = bg_gb * beta;
                b = bg_gb * beta;
            }
            if let Some(n) = &noise {
                r += n.sample(&mut rng);
                g += n.sample(&mut rng);
                b += n.sample(&mut rng);
            }
            img.set(
                x,
                y,
                (
                    r.round().clamp(0.0, 255.0) as u8,
                    g.round().clamp(0.0, 255.0) as u8,
                    b.round().clamp(0.0, 255.0) as u8,
                ),
            );
        }
    }

    (
        img,
        RenderTruth {
            ear_mask,
            n_endpoints: t.tree.n_endpoints,
            n_bifurcations: t.tree.n_bifurcations,
        },
    )
}

/// One manifest row per generated image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub pig_id: String,
    pub path: String,
    pub n_endpoints: usize,
    pub n_bifurcations: usize,
    pub seed: u64,
}

pub fn pig_id(index: usize) -> String {
    format!("pig_{:02}", index + 1)
}

/// Deterministic (template seed, instance seed) pair for image `img` of pig
/// `pig` under master seed `seed`.
pub fn herd_seeds(seed: u64, pig: usize, img: usize) -> (u64, u64) {
    (
        derive_seed(seed, pig as u64),
        derive_seed(seed, 1_000_003u64.wrapping_mul(pig as u64 + 1).wrapping_add(img as u64)),
    )
}

/// Render a herd in memory: (pig_id, image, truth) triples in (pig, image)
/// order. Rendering parallelizes per image; seeds are precomputed so the
/// result is independent of thread count.
pub fn herd_in_memory(
    n_pigs: usize,
    images_each: usize,
    cfg: &RenderConfig,
    seed: u64,
) -> Vec<(String, RasterImage, RenderTruth)> {
    let jobs: Vec<(usize, usize)> = (0..n_pigs)
        .flat_map(|p| (0..images_each).map(move |i| (p, i)))
        .collect();
    jobs.par_iter()
        .map(|&(p, i)| {
            let (tseed, iseed) = herd_seeds(seed, p, i);
            let template = make_template(tseed);
            let (img, truth) = render(&template, cfg, iseed);
            (pig_id(p), img, truth)
        })
        .collect()
}

/// Generate a herd on disk: PNGs plus `manifest.json` (a JSON array of
/// [`ManifestEntry`] rows).
pub fn generate_herd(
    n_pigs: usize,
    images_each: usize,
    cfg: &RenderConfig,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<ManifestEntry>> {
    if n_pigs < 2 {
        return Err(crate::error::Error::invalid_param(
            "a herd needs at least 2 pigs",
        ));
    }
    std::fs::create_dir_all(out_dir)?;

    let jobs: Vec<(usize, usize)> = (0..n_pigs)
        .flat_map(|p| (0..images_each).map(move |i| (p, i)))
        .collect();
    let rendered: Vec<(usize, usize, RasterImage, RenderTruth, u64)> = jobs
        .par_iter()
        .map(|&(p, i)| {
            let (tseed, iseed) = herd_seeds(seed, p, i);
            let template = make_template(tseed);
            let (img, truth) = render(&template, cfg, iseed);
            (p, i, img, truth, iseed)
        })
        .collect();

    let mut manifest = Vec::with_capacity(rendered.len());
    for (p, i, img, truth, iseed) in &rendered {
        let name = format!("{}_img_{:03}.png", pig_id(*p), i);
        let path = out_dir.join(&name);
        io::save_raster_png(img, &path)?;
        manifest.push(ManifestEntry {
            pig_id: pig_id(*p),
            path: name,
            n_endpoints: truth.n_endpoints,
            n_bifurcations: truth.n_bifurcations,
            seed: *iseed,
        });
    }
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(out_dir.join("manifest.json"), json)?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
