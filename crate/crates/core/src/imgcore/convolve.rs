//! 3x3 convolution with replicate borders and 8-bit clamping.

use super::{GrayImage, Kernel3x3};

/// Convolve with a 3x3 kernel. Borders replicate the nearest edge pixel and
/// results are rounded then clamped to [0,255].
pub fn convolve3x3(img: &GrayImage, k: &Kernel3x3) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut out = GrayImage::new(w, h);
    if w == 0 || h == 0 {
        return out;
    }
    let c = &k.coefficients;
    let src = img.data();
    let dst = out.data_mut();

    let clamp8 = |acc: f32| acc.round().clamp(0.0, 255.0) as u8;

    if w >= 3 && h >= 3 {
        // Interior: direct indexing, no border checks.
        for y in 1..h - 1 {
            let up = (y - 1) * w;
            let mid = y * w;
            let dn = (y + 1) * w;
            for x in 1..w - 1 {
                let acc = c[0] * src[up + x - 1] as f32
                    + c[1] * src[up + x] as f32
                    + c[2] * src[up + x + 1] as f32
                    + c[3] * src[mid + x - 1] as f32
                    + c[4] * src[mid + x] as f32
                    + c[5] * src[mid + x + 1] as f32
                    + c[6] * src[dn + x - 1] as f32
                    + c[7] * src[dn + x] as f32
                    + c[8] * src[dn + x + 1] as f32;
                dst[mid + x] = clamp8(acc);
            }
        }
    }

    // Border rows/columns with replication.
    let border_pixel = |x: usize, y: usize, dst: &mut [u8]| {
        let mut acc = 0.0f32;
        let mut ki = 0;
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                acc += c[ki] * img.get_replicate(x as isize + dx, y as isize + dy) as f32;
                ki += 1;
            }
        }
        dst[y * w + x] = clamp8(acc);
    };
    for x in 0..w {
        border_pixel(x, 0, dst);
        border_pixel(x, h - 1, dst);
    }
    for y in 0..h {
        border_pixel(0, y, dst);
        border_pixel(w - 1, y, dst);
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sum_kernel_preserves_constant() {
        let img = GrayImage::constant(8, 6, 77);
        let out = convolve3x3(&img, &Kernel3x3::sharpen());
        assert!(out.data().iter().all(|&v| v == 77));
    }

    #[test]
    fn identity_kernel_is_noop() {
        let img = GrayImage::from_fn(9, 7, |x, y| ((x * 31 + y * 17) % 256) as u8);
        assert_eq!(convolve3x3(&img, &Kernel3x3::identity()), img);
    }

    #[test]
    fn sharpen_matches_brute_force_on_impulse() {
        // Single pixel of 100 on black; oracle is direct summation with
        // replicate borders and clamping, evaluated over the whole 5x5 grid.
        let mut img = GrayImage::new(5, 5);
        img.set(2, 2, 100);
        let k = Kernel3x3::sharpen();
        let out = convolve3x3(&img, &k);

        let oracle = |x: isize, y: isize| -> u8 {
            let mut acc = 0.0f32;
            let mut ki = 0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    acc += k.coefficients[ki] * img.get_replicate(x + dx, y + dy) as f32;
                    ki += 1;
                }
            }
            acc.round().clamp(0.0, 255.0) as u8
        };
        for y in 0..5 {
            for x in 0..5 {
                assert_eq!(out.get(x, y), oracle(x as isize, y as isize), "({x},{y})");
            }
        }
        // Center 5*100 = 500 clamps to 255, cross neighbors -100 clamp to 0.
        assert_eq!(out.get(2, 2), 255);
        assert_eq!(out.get(1, 2), 0);
        assert_eq!(out.get(2, 1), 0);
    }

    #[test]
    fn dimensions_preserved_and_range_clamped() {
        let img = GrayImage::from_fn(13, 11, |x, y| ((x * 53 + y * 97) % 256) as u8);
        let out = convolve3x3(&img, &Kernel3x3::sharpen());
        assert_eq!(out.width(), 13);
        assert_eq!(out.height(), 11);
    }
}
