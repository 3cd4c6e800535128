// Temporary ring-diagnosis probe (deleted before release).
use earvein_core::imgcore::{self};
use earvein_core::roiseg::{extract_roi, RoiConfig};
use earvein_core::synth::{self, RenderConfig};
use earvein_core::veinmap::{enhance, VeinConfig};

fn main() {
    let t = synth::make_template(0);
    let cfg = RenderConfig::low_noise(1024, 768);
    let (img, _truth) = synth::render(&t, &cfg, 7);
    let roi = extract_roi(&img, &RoiConfig::default()).unwrap();
    let vcfg = VeinConfig::default();
    let enhanced = enhance(&roi, &vcfg);

    // Horizontal slice through the ear center: raw red, enhanced, mask.
    let cy = (768.0 * t.outline.center.1) as usize;
    print!("slice y={cy}: x:r/enh/mask  ");
    let mut prev_in = false;
    for x in 0..1024 {
        let inside = roi.mask.get(x, cy);
        if inside != prev_in {
            // print a window around the transition
            let lo = x.saturating_sub(6);
            let hi = (x + 6).min(1023);
            println!();
            for xx in lo..=hi {
                println!(
                    "  x={xx} r={} enh={} mask={}",
                    img.r.get(xx, cy),
                    enhanced.get(xx, cy),
                    roi.mask.get(xx, cy) as u8
                );
            }
            prev_in = inside;
        }
    }
    println!();

    // Distribution of strong-canny pixels: how many lie within 3px of the
    // mask boundary vs near vein strokes.
    let canny = imgcore::canny(&enhanced, vcfg.canny_low, vcfg.canny_high);
    let eroded = imgcore::erode(&roi.mask, imgcore::StructuringElement::SQUARE5);
    let mut near_boundary = 0;
    let mut interior = 0;
    for y in 0..768 {
        for x in 0..1024 {
            if canny.get(x, y) {
                if roi.mask.get(x, y) && !eroded.get(x, y) {
                    near_boundary += 1;
                } else if eroded.get(x, y) {
                    interior += 1;
                }
            }
        }
    }
    println!("canny pixels inside mask: near-boundary(2px)={near_boundary} interior={interior}");
}
