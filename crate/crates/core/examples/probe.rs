// Temporary calibration probe (deleted before release).
use std::time::Instant;

use earvein_core::roiseg::{extract_roi, RoiConfig};
use earvein_core::synth::{self, RenderConfig};
use earvein_core::veinmap::{extract_veins, VeinConfig};

fn main() {
    let roi_cfg = RoiConfig::default();
    let vein_cfg = VeinConfig::default();

    println!("== tier presets ==");
    for (tier, branch, cfg) in RenderConfig::feasible_tier_presets(1024, 768) {
        let mut ious = Vec::new();
        let mut stats = (0.0, 0.0);
        for seed in 0..3u64 {
            let t = synth::make_template(seed + 100);
            let (img, truth) = synth::render(&t, &cfg, seed);
            let s = earvein_core::roiseg::channel_stats(&img.r);
            stats = (s.mean, s.stddev);
            match extract_roi(&img, &roi_cfg) {
                Ok(roi) => {
                    let iou = roi.mask.iou(&truth.ear_mask).unwrap();
                    ious.push(iou);
                }
                Err(e) => {
                    ious.push(0.0);
                    println!("  seed {seed}: ERR {e}");
                }
            }
        }
        println!(
            "{tier:?}/{branch:?}: mu={:.1} sigma={:.1} tier_ok={} branch_ok={} iou={:?}",
            stats.0,
            stats.1,
            synth::tier_of(stats.1) == tier,
            synth::branch_of(stats.0) == branch,
            ious.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        );
    }

    println!("== minutiae (low-noise default) ==");
    let cfg = RenderConfig::low_noise(1024, 768);
    let mut ok = 0;
    let mut total = 0;
    for seed in 0..10u64 {
        let t = synth::make_template(seed);
        let (img, truth) = synth::render(&t, &cfg, 7 + seed);
        let t0 = Instant::now();
        let roi = match extract_roi(&img, &roi_cfg) {
            Ok(r) => r,
            Err(e) => {
                println!("seed {seed}: ROI ERR {e}");
                continue;
            }
        };
        let troi = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let m = match extract_veins(&roi, &vein_cfg) {
            Ok(m) => m,
            Err(e) => {
                println!("seed {seed}: VEIN ERR {e}");
                continue;
            }
        };
        let tvein = t1.elapsed().as_secs_f64();
        let iou = roi.mask.iou(&truth.ear_mask).unwrap();
        let db = m.bifurcations.len() as i64 - truth.n_bifurcations as i64;
        let de = m.endpoints.len() as i64 - truth.n_endpoints as i64;
        total += 1;
        if db.abs() <= 2 && de.abs() <= 2 {
            ok += 1;
        }
        println!(
            "seed {seed}: iou={iou:.3} bif {} vs {} ({db:+}), end {} vs {} ({de:+}), roi {troi:.2}s veins {tvein:.2}s",
            m.bifurcations.len(),
            truth.n_bifurcations,
            m.endpoints.len(),
            truth.n_endpoints
        );
    }
    println!("minutiae within +-2: {ok}/{total}");
}
