//! PNG and PGM input/output for debug images and dataset files.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

use super::{BinaryMask, GrayImage, RasterImage};

pub fn load_raster_png(path: &Path) -> Result<RasterImage> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut out = RasterImage::new(w, h);
    for (x, y, p) in img.enumerate_pixels() {
        out.set(x as usize, y as usize, (p.0[0], p.0[1], p.0[2]));
    }
    Ok(out)
}

pub fn save_raster_png(img: &RasterImage, path: &Path) -> Result<()> {
    let (w, h) = (img.width(), img.height());
    let mut buf = image::RgbImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let (r, g, b) = img.get(x, y);
            buf.put_pixel(x as u32, y as u32, image::Rgb([r, g, b]));
        }
    }
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

pub fn save_gray_png(img: &GrayImage, path: &Path) -> Result<()> {
    let buf = image::GrayImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.data().to_vec(),
    )
    .expect("buffer matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Write a mask as binary PGM (P5), foreground 255 and background 0.
pub fn save_mask_pgm(mask: &BinaryMask, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", mask.width(), mask.height())?;
    let bytes: Vec<u8> = mask.data().iter().map(|&v| if v { 255 } else { 0 }).collect();
    f.write_all(&bytes)?;
    Ok(())
}

pub fn save_gray_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", img.width(), img.height())?;
    f.write_all(img.data())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let mut img = RasterImage::new(5, 4);
        for y in 0..4 {
            for x in 0..5 {
                img.set(x, y, ((x * 50) as u8, (y * 60) as u8, 7));
            }
        }
        save_raster_png(&img, &path).unwrap();
        let loaded = load_raster_png(&path).unwrap();
        assert_eq!(loaded, img);
    }

    #[test]
    fn mask_pgm_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let mut m = BinaryMask::new(2, 2);
        m.set(0, 0, true);
        m.set(1, 1, true);
        save_mask_pgm(&m, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n2 2\n255\n"));
        assert_eq!(&bytes[bytes.len() - 4..], &[255, 0, 0, 255]);
    }
}
