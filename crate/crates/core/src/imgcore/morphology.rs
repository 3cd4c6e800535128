//! Binary morphology with square structuring elements.
//!
//! Out-of-bounds pixels count as background. Square elements are separable,
//! so erosion and dilation run as a horizontal and a vertical 1-D pass.

use super::{BinaryMask, StructuringElement};

/// Minkowski erosion: a pixel survives iff every pixel under the element is
/// foreground.
pub fn erode(m: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let r = se.radius();
    vertical_pass(&horizontal_pass(m, r, false), r, false)
}

/// Minkowski dilation: a pixel is set iff any pixel under the element is
/// foreground.
pub fn dilate(m: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let r = se.radius();
    vertical_pass(&horizontal_pass(m, r, true), r, true)
}

/// Closing: dilate then erode.
pub fn morph_close(m: &BinaryMask, se: StructuringElement) -> BinaryMask {
    erode(&dilate(m, se), se)
}

/// Opening: erode then dilate.
pub fn morph_open(m: &BinaryMask, se: StructuringElement) -> BinaryMask {
    dilate(&erode(m, se), se)
}

// `any == true` gives dilation semantics, `any == false` erosion.
fn horizontal_pass(m: &BinaryMask, r: usize, any: bool) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let mut out = BinaryMask::new(w, h);
    let src = m.data();
    let dst = out.data_mut();
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let orow = &mut dst[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            let window = &row[lo..=hi];
            let full_window = hi - lo == 2 * r;
            orow[x] = if any {
                window.iter().any(|&v| v)
            } else {
                // Border windows include out-of-bounds background.
                full_window && window.iter().all(|&v| v)
            };
        }
    }
    out
}

fn vertical_pass(m: &BinaryMask, r: usize, any: bool) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let mut out = BinaryMask::new(w, h);
    let src = m.data();
    let dst = out.data_mut();
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        let full_window = hi - lo == 2 * r;
        for x in 0..w {
            let mut acc = if any { false } else { full_window };
            for yy in lo..=hi {
                let v = src[yy * w + x];
                if any {
                    acc |= v;
                    if acc {
                        break;
                    }
                } else {
                    acc &= v;
                    if !acc {
                        break;
                    }
                }
            }
            dst[y * w + x] = acc;
        }
    }
    out
}
