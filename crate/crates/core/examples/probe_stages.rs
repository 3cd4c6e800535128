// Temporary stage-dump probe (deleted before release).
use earvein_core::imgcore::{self, io};
use earvein_core::roiseg::{extract_roi, RoiConfig};
use earvein_core::synth::{self, RenderConfig};
use earvein_core::veinmap::{self, extract_veins_stages, VeinConfig};
use std::path::Path;

fn main() {
    let out = Path::new("/tmp/probe");
    std::fs::create_dir_all(out).unwrap();
    let t = synth::make_template(0);
    let cfg = RenderConfig::low_noise(1024, 768);
    let (img, truth) = synth::render(&t, &cfg, 7);
    io::save_raster_png(&img, &out.join("render.png")).unwrap();

    let roi = extract_roi(&img, &RoiConfig::default()).unwrap();
    println!("truth: bif={} end={}", truth.n_bifurcations, truth.n_endpoints);
    let vcfg = VeinConfig::default();
    let (m, stages) = extract_veins_stages(&roi, &vcfg).unwrap();

    io::save_gray_png(&stages.enhanced, &out.join("enhanced.png")).unwrap();
    io::save_mask_pgm(&stages.binary, &out.join("binary.pgm")).unwrap();
    io::save_mask_pgm(&stages.clean, &out.join("clean.pgm")).unwrap();
    io::save_mask_pgm(&stages.major, &out.join("major.pgm")).unwrap();
    io::save_mask_pgm(&stages.merged, &out.join("merged.pgm")).unwrap();
    io::save_mask_pgm(&stages.skeleton.mask, &out.join("skeleton.pgm")).unwrap();

    let canny = imgcore::canny(&stages.enhanced, vcfg.canny_low, vcfg.canny_high);
    io::save_mask_pgm(&canny, &out.join("canny.pgm")).unwrap();

    let stat = |name: &str, m: &earvein_core::imgcore::BinaryMask| {
        let lm = imgcore::connected_components(m);
        println!(
            "{name}: fg={} components={}",
            m.count_foreground(),
            lm.num_components()
        );
    };
    stat("binary", &stages.binary);
    stat("clean", &stages.clean);
    stat("major", &stages.major);
    stat("canny", &canny);
    let canny_in = canny.and(&roi.mask).unwrap();
    stat("canny&roi", &canny_in);
    // Canny pixels escaping the cleaned vein mask
    let mut escaped = canny_in.clone();
    for (i, v) in escaped.data_mut().iter_mut().enumerate() {
        if stages.major.data()[i] {
            *v = false;
        }
    }
    stat("canny escaped", &escaped);
    stat("merged", &stages.merged);
    stat("skeleton", &stages.skeleton.mask);
    println!(
        "minutiae: bif={} end={} samples={}",
        m.bifurcations.len(),
        m.endpoints.len(),
        m.samples.len()
    );

    // Where are the endpoints? histogram by normalized radius
    let (bifs, ends) = veinmap::detect_minutiae(&stages.skeleton);
    let _ = bifs;
    let cx = 1024.0 * t.outline.center.0;
    let cy = 768.0 * t.outline.center.1;
    let mut near_rim = 0;
    for e in &ends {
        let dx = e.x as f64 - cx;
        let dy = e.y as f64 - cy;
        let r = (dx * dx + dy * dy).sqrt();
        if r > 0.7 * 0.24 * 768.0 {
            near_rim += 1;
        }
    }
    println!("endpoints beyond 0.7 trunk radius: {near_rim}/{}", ends.len());
}
