//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression, double-threshold hysteresis.

use super::{BinaryMask, GrayImage};

const SIGMA: f64 = 1.4;

/// Detect edges. `low`/`high` are hysteresis thresholds on the Sobel gradient
/// magnitude of the sigma=1.4 Gaussian-smoothed image (replicate borders).
pub fn canny(img: &GrayImage, low: f64, high: f64) -> BinaryMask {
    assert!(low >= 0.0 && low <= high, "require 0 <= low <= high");
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 {
        return BinaryMask::new(w, h);
    }
    let smoothed = gaussian5(img);
    let (gx, gy) = sobel(&smoothed, w, h);

    let mut mag = vec![0.0f32; w * h];
    for i in 0..w * h {
        mag[i] = (gx[i] * gx[i] + gy[i] * gy[i]).sqrt();
    }

    // Non-maximum suppression. The neighbor "ahead" is the quantized gradient
    // direction (toward brighter); a pixel survives only if strictly greater
    // than the neighbor behind and at least equal to the neighbor ahead, so a
    // two-pixel plateau straddling a perfect step keeps its darker pixel only.
    let tan22 = 0.414_213_56_f32;
    let at = |x: isize, y: isize, buf: &[f32]| -> f32 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            buf[y as usize * w + x as usize]
        }
    };
    let mut nms = vec![false; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let m = mag[i];
            if m < low as f32 || m == 0.0 {
                continue;
            }
            let (dx, dy) = quantize_direction(gx[i], gy[i], tan22);
            let ahead = at(x + dx, y + dy, &mag);
            let behind = at(x - dx, y - dy, &mag);
            nms[i] = m > behind && m >= ahead;
        }
    }

    // Hysteresis: seeds at mag >= high, grown through candidates >= low.
    let mut out = BinaryMask::new(w, h);
    let mut stack: Vec<usize> = Vec::new();
    {
        let dst = out.data_mut();
        for i in 0..w * h {
            if nms[i] && mag[i] >= high as f32 && !dst[i] {
                dst[i] = true;
                stack.push(i);
            }
        }
        while let Some(i) = stack.pop() {
            let x = i % w;
            let y = i / w;
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let ni = ny * w + nx;
                    if nms[ni] && !dst[ni] {
                        dst[ni] = true;
                        stack.push(ni);
                    }
                }
            }
        }
    }
    out
}

/// Quantize a gradient vector to one of 8 unit steps (4 axes).
fn quantize_direction(gx: f32, gy: f32, tan22: f32) -> (isize, isize) {
    let ax = gx.abs();
    let ay = gy.abs();
    if ay <= tan22 * ax {
        (if gx >= 0.0 { 1 } else { -1 }, 0)
    } else if ax <= tan22 * ay {
        (0, if gy >= 0.0 { 1 } else { -1 })
    } else {
        (
            if gx >= 0.0 { 1 } else { -1 },
            if gy >= 0.0 { 1 } else { -1 },
        )
    }
}

/// Separable 5-tap Gaussian, replicate borders.
fn gaussian5(img: &GrayImage) -> Vec<f32> {
    let (w, h) = (img.width(), img.height());
    let mut k = [0.0f32; 5];
    let mut sum = 0.0f32;
    for (i, kv) in k.iter_mut().enumerate() {
        let d = i as f64 - 2.0;
        *kv = (-d * d / (2.0 * SIGMA * SIGMA)).exp() as f32;
        sum += *kv;
    }
    for kv in k.iter_mut() {
        *kv /= sum;
    }

    let src = img.data();
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0f32;
            for (i, &kv) in k.iter().enumerate() {
                let xx = (x as isize + i as isize - 2).clamp(0, w as isize - 1) as usize;
                acc += kv * row[xx] as f32;
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f32;
            for (i, &kv) in k.iter().enumerate() {
                let yy = (y as isize + i as isize - 2).clamp(0, h as isize - 1) as usize;
                acc += kv * tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn sobel(buf: &[f32], w: usize, h: usize) -> (Vec<f32>, Vec<f32>) {
    let at = |x: isize, y: isize| -> f32 {
        let xc = x.clamp(0, w as isize - 1) as usize;
        let yc = y.clamp(0, h as isize - 1) as usize;
        buf[yc * w + xc]
    };
    let mut gx = vec![0.0f32; w * h];
    let mut gy = vec![0.0f32; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let tl = at(x - 1, y - 1);
            let tc = at(x, y - 1);
            let tr = at(x + 1, y - 1);
            let ml = at(x - 1, y);
            let mr = at(x + 1, y);
            let bl = at(x - 1, y + 1);
            let bc = at(x, y + 1);
            let br = at(x + 1, y + 1);
            let i = y as usize * w + x as usize;
            gx[i] = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            gy[i] = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
        }
    }
    (gx, gy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::connected_components;

    #[test]
    fn constant_image_has_no_edges() {
        let img = GrayImage::constant(20, 20, 77);
        assert!(canny(&img, 50.0, 150.0).is_empty());
    }

    #[test]
    fn hard_vertical_step_yields_single_edge_chain() {
        // Step 0|255 at x=10. The smoothed Sobel magnitude along the step is
        // ~0.543*4*255 = 554, well above high=150.
        let img = GrayImage::from_fn(20, 16, |x, _| if x >= 10 { 255 } else { 0 });
        let edges = canny(&img, 50.0, 150.0);
        assert!(!edges.is_empty());
        let lm = connected_components(&edges);
        assert_eq!(lm.num_components(), 1, "edge must be one connected chain");
        // The chain is vertical: exactly one edge pixel per row.
        for y in 0..16 {
            let count = (0..20).filter(|&x| edges.get(x, y)).count();
            assert_eq!(count, 1, "row {y}");
        }
    }

    #[test]
    fn shallow_ramp_below_low_is_empty() {
        // Gradient of 1 per pixel: Sobel magnitude ~8, below low=50.
        let img = GrayImage::from_fn(40, 10, |x, _| x as u8);
        assert!(canny(&img, 50.0, 150.0).is_empty());
    }

    #[test]
    fn step_edge_lands_on_dark_side() {
        let img = GrayImage::from_fn(20, 8, |x, _| if x >= 10 { 255 } else { 0 });
        let edges = canny(&img, 50.0, 150.0);
        for y in 0..8 {
            assert!(edges.get(9, y), "dark-side column should carry the edge");
            assert!(!edges.get(10, y), "bright-side column should be suppressed");
        }
    }
}
