//! Adaptive mean thresholding plus a small Otsu utility.

use super::{BinaryMask, GrayImage};

/// Threshold against the local mean: a pixel is foreground iff it exceeds the
/// mean of its `block`x`block` neighborhood by more than `offset`. Borders
/// replicate. `block` must be odd and >= 3.
pub fn adaptive_mean_threshold(img: &GrayImage, block: usize, offset: i32) -> BinaryMask {
    assert!(block >= 3 && block % 2 == 1, "block must be odd and >= 3");
    let (w, h) = (img.width(), img.height());
    let mut out = BinaryMask::new(w, h);
    if w == 0 || h == 0 {
        return out;
    }
    let r = block / 2;

    // Horizontal box sums over a replicate-padded row, then vertical box sums
    // over the per-row results. Row sums fit u32 comfortably (255 * block).
    let mut row_sums = vec![0u32; w * h];
    let src = img.data();
    let mut padded = vec![0u8; w + 2 * r];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        padded[..r].fill(row[0]);
        padded[r..r + w].copy_from_slice(row);
        padded[r + w..].fill(row[w - 1]);
        let mut acc: u32 = padded[..block].iter().map(|&v| v as u32).sum();
        let sums = &mut row_sums[y * w..(y + 1) * w];
        sums[0] = acc;
        for x in 1..w {
            acc += padded[x + block - 1] as u32;
            acc -= padded[x - 1] as u32;
            sums[x] = acc;
        }
    }

    let area = (block * block) as f64;
    let dst = out.data_mut();
    let mut col_acc = vec![0u64; w];
    // Initialize vertical windows for y = 0 with replicated top rows.
    for x in 0..w {
        let mut acc = (r as u64 + 1) * row_sums[x] as u64;
        for yy in 1..=r {
            let yc = yy.min(h - 1);
            acc += row_sums[yc * w + x] as u64;
        }
        col_acc[x] = acc;
    }
    for y in 0..h {
        if y > 0 {
            let enter = (y + r).min(h - 1);
            let leave = (y as isize - 1 - r as isize).clamp(0, h as isize - 1) as usize;
            for x in 0..w {
                col_acc[x] += row_sums[enter * w + x] as u64;
                col_acc[x] -= row_sums[leave * w + x] as u64;
            }
        }
        for x in 0..w {
            let mean = col_acc[x] as f64 / area;
            dst[y * w + x] = src[y * w + x] as f64 - offset as f64 > mean;
        }
    }
    out
}

/// Otsu's global threshold level: maximizes between-class variance over the
/// 256-bin histogram. Kept as a comparison baseline for tests only; the ROI
/// pipeline uses the adaptive tier scheme instead.
pub fn otsu_level(img: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0;
    }
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as f64 * c as f64)
        .sum();

    let mut best_t = 0u8;
    let mut best_var = -1.0f64;
    let mut w0 = 0u64;
    let mut sum0 = 0.0f64;
    for t in 0..256 {
        w0 += hist[t];
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        sum0 += t as f64 * hist[t] as f64;
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let var = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    best_t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_positive_offset_all_background() {
        let img = GrayImage::constant(9, 9, 100);
        let m = adaptive_mean_threshold(&img, 3, 2);
        assert!(m.is_empty());
    }

    #[test]
    fn very_negative_offset_all_foreground() {
        let img = GrayImage::from_fn(9, 9, |x, y| ((x * 29 + y * 3) % 256) as u8);
        let m = adaptive_mean_threshold(&img, 5, -256);
        assert_eq!(m.count_foreground(), 81);
    }

    #[test]
    fn vertical_step_marks_bright_boundary_column() {
        // Columns 0..4 are 0, columns 4..8 are 255. With block=3 and offset=0
        // the hand-computed 3-column means are: at x=3 mean=(0+0+255)/3=85 so
        // 0 is background; at x=4 mean=(0+255+255)/3=170 so 255 is foreground;
        // interior columns equal their mean exactly and stay background.
        let img = GrayImage::from_fn(8, 4, |x, _| if x >= 4 { 255 } else { 0 });
        let m = adaptive_mean_threshold(&img, 3, 0);
        for y in 0..4 {
            for x in 0..8 {
                assert_eq!(m.get(x, y), x == 4, "({x},{y})");
            }
        }
    }

    #[test]
    fn mean_matches_naive_window_on_random_image() {
        let img = GrayImage::from_fn(17, 13, |x, y| ((x * 71 + y * 131 + 7) % 256) as u8);
        let block = 5usize;
        let r = (block / 2) as isize;
        let offset = 3;
        let m = adaptive_mean_threshold(&img, block, offset);
        for y in 0..13isize {
            for x in 0..17isize {
                let mut sum = 0u32;
                for dy in -r..=r {
                    for dx in -r..=r {
                        sum += img.get_replicate(x + dx, y + dy) as u32;
                    }
                }
                let mean = sum as f64 / (block * block) as f64;
                let expect = img.get(x as usize, y as usize) as f64 - offset as f64 > mean;
                assert_eq!(m.get(x as usize, y as usize), expect, "({x},{y})");
            }
        }
    }

    #[test]
    fn otsu_separates_bimodal() {
        let img = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 40 } else { 200 });
        let t = otsu_level(&img);
        assert!((40..200).contains(&t), "t={t}");
    }
}
