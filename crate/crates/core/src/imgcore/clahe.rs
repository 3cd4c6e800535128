//! Contrast-limited adaptive histogram equalization.

use super::GrayImage;

/// CLAHE over a `tiles` x `tiles` grid. Each tile's 256-bin histogram is
/// clipped at `clip_limit` times the mean bin height (excess redistributed
/// uniformly), turned into an equalization LUT, and per-pixel outputs blend
/// the four surrounding tile LUTs bilinearly. Images smaller than one pixel
/// per tile fall back to a single global tile.
pub fn clahe(img: &GrayImage, tiles: usize, clip_limit: f64) -> GrayImage {
    assert!(tiles >= 1, "tiles must be >= 1");
    assert!(clip_limit > 0.0, "clip_limit must be positive");
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 {
        return img.clone();
    }
    let t = if w < tiles || h < tiles { 1 } else { tiles };

    // Tile boundaries partition each axis near-evenly.
    let xb: Vec<usize> = (0..=t).map(|i| i * w / t).collect();
    let yb: Vec<usize> = (0..=t).map(|i| i * h / t).collect();

    let src = img.data();
    let mut luts = vec![[0u8; 256]; t * t];
    for ty in 0..t {
        for tx in 0..t {
            let mut hist = [0u64; 256];
            for y in yb[ty]..yb[ty + 1] {
                for x in xb[tx]..xb[tx + 1] {
                    hist[src[y * w + x] as usize] += 1;
                }
            }
            let total = ((xb[tx + 1] - xb[tx]) * (yb[ty + 1] - yb[ty])) as u64;
            clip_histogram(&mut hist, total, clip_limit);
            let lut = &mut luts[ty * t + tx];
            let mut cdf = 0u64;
            for v in 0..256 {
                cdf += hist[v];
                lut[v] = ((cdf as f64 * 255.0 / total as f64).round()).clamp(0.0, 255.0) as u8;
            }
        }
    }

    if t == 1 {
        let lut = &luts[0];
        return img.map(|v| lut[v as usize]);
    }

    // Tile centers used for bilinear blending of the LUT outputs.
    let cx: Vec<f64> = (0..t).map(|i| (xb[i] + xb[i + 1]) as f64 / 2.0).collect();
    let cy: Vec<f64> = (0..t).map(|i| (yb[i] + yb[i + 1]) as f64 / 2.0).collect();

    let locate = |centers: &[f64], p: f64| -> (usize, f64) {
        if p <= centers[0] {
            return (0, 0.0);
        }
        if p >= centers[t - 1] {
            return (t - 2, 1.0);
        }
        let mut i = 0;
        while i + 1 < t && centers[i + 1] <= p {
            i += 1;
        }
        let s = (p - centers[i]) / (centers[i + 1] - centers[i]);
        (i, s)
    };

    let mut out = GrayImage::new(w, h);
    let dst = out.data_mut();
    // Precompute per-column tile index and weight.
    let col_pos: Vec<(usize, f64)> = (0..w).map(|x| locate(&cx, x as f64)).collect();
    for y in 0..h {
        let (iy, sy) = locate(&cy, y as f64);
        let top = &luts[iy * t..iy * t + t];
        let bot = &luts[(iy + 1) * t..(iy + 1) * t + t];
        for x in 0..w {
            let (ix, sx) = col_pos[x];
            let v = src[y * w + x] as usize;
            let tl = top[ix][v] as f64;
            let tr = top[ix + 1][v] as f64;
            let bl = bot[ix][v] as f64;
            let br = bot[ix + 1][v] as f64;
            let blended = tl * (1.0 - sx) * (1.0 - sy)
                + tr * sx * (1.0 - sy)
                + bl * (1.0 - sx) * sy
                + br * sx * sy;
            dst[y * w + x] = blended.round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

fn clip_histogram(hist: &mut [u64; 256], total: u64, clip_limit: f64) {
    if total == 0 {
        return;
    }
    let clip = if clip_limit.is_finite() {
        (clip_limit * total as f64 / 256.0).round().max(1.0) as u64
    } else {
        u64::MAX
    };
    let mut excess = 0u64;
    for b in hist.iter_mut() {
        if *b > clip {
            excess += *b - clip;
            *b = clip;
        }
    }
    if excess == 0 {
        return;
    }
    let share = excess / 256;
    let rem = (excess % 256) as usize;
    for (i, b) in hist.iter_mut().enumerate() {
        *b += share + u64::from(i < rem);
    }
}
