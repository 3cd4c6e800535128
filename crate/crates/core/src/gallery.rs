//! Persistent enrollment store (JSON-lines) and the end-to-end identify path.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classify::TrainedModel;
use crate::error::{Error, Result};
use crate::featvec::{self, FeatureVector, FEATURE_LEN};
use crate::imgcore::RasterImage;
use crate::roiseg::{extract_roi, RoiConfig};
use crate::veinmap::{extract_veins, VeinConfig};

pub const GALLERY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryRecord {
    #[serde(rename = "v")]
    pub version: u32,
    pub pig_id: String,
    pub source: String,
    pub enrolled_at: String,
    pub features: Vec<f64>,
}

impl GalleryRecord {
    pub fn feature_vector(&self) -> Result<FeatureVector> {
        FeatureVector::from_values(self.features.clone())
    }
}

/// Append-only enrollment store. Duplicate pig ids are allowed: each record
/// is one template and classifiers consume all of them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gallery {
    pub records: Vec<GalleryRecord>,
}

impl Gallery {
    pub fn new() -> Self {
        Gallery::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct pig ids in sorted order.
    pub fn pig_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.records.iter().map(|r| r.pig_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        for record in &self.records {
            let line = serde_json::to_string(record)?;
            writeln!(f, "{line}")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Gallery> {
        let f = std::fs::File::open(path)?;
        let reader = BufReader::new(f);
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: GalleryRecord =
                serde_json::from_str(&line).map_err(|e| Error::GalleryLine {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if record.version != GALLERY_VERSION {
                return Err(Error::GalleryLine {
                    line: line_no,
                    message: format!(
                        "unsupported record version {} (expected {GALLERY_VERSION})",
                        record.version
                    ),
                });
            }
            if record.features.len() != FEATURE_LEN {
                return Err(Error::GalleryLine {
                    line: line_no,
                    message: format!(
                        "feature vector has {} values, expected {FEATURE_LEN}",
                        record.features.len()
                    ),
                });
            }
            records.push(record);
        }
        Ok(Gallery { records })
    }
}

/// Per-stage wall-clock timings of the identify pipeline, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub segmentation_s: f64,
    pub veins_s: f64,
    pub features_s: f64,
    pub predict_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone)]
pub struct IdentifyOutcome {
    /// (pig_id, score) sorted by descending score, class id on ties.
    pub ranking: Vec<(String, f64)>,
    pub timings: StageTimings,
}

/// Run the pipeline on an image and append a record for `pig_id`. Errors
/// leave the gallery untouched.
pub fn enroll(
    gallery: &mut Gallery,
    pig_id: &str,
    source: &str,
    image: &RasterImage,
    roi_cfg: &RoiConfig,
    vein_cfg: &VeinConfig,
) -> Result<()> {
    if pig_id.is_empty() {
        return Err(Error::invalid_param("pig id must be non-empty"));
    }
    let fv = extract_features(image, roi_cfg, vein_cfg)?.0;
    gallery.records.push(GalleryRecord {
        version: GALLERY_VERSION,
        pig_id: pig_id.to_string(),
        source: source.to_string(),
        enrolled_at: chrono::Utc::now().to_rfc3339(),
        features: fv.values().to_vec(),
    });
    Ok(())
}

/// Full pipeline on one image: features plus per-stage timings (prediction
/// timing left at zero).
pub fn extract_features(
    image: &RasterImage,
    roi_cfg: &RoiConfig,
    vein_cfg: &VeinConfig,
) -> Result<(FeatureVector, StageTimings)> {
    let t0 = Instant::now();
    let roi = extract_roi(image, roi_cfg)?;
    let segmentation_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let minutiae = extract_veins(&roi, vein_cfg)?;
    let veins_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let fv = featvec::assemble(&minutiae)?;
    let features_s = t2.elapsed().as_secs_f64();

    Ok((
        fv,
        StageTimings {
            segmentation_s,
            veins_s,
            features_s,
            predict_s: 0.0,
            total_s: segmentation_s + veins_s + features_s,
        },
    ))
}

/// Identify a pig: full pipeline then model prediction, with timings.
/// Read-only on gallery and model.
pub fn identify(
    _gallery: &Gallery,
    model: &TrainedModel,
    image: &RasterImage,
    roi_cfg: &RoiConfig,
    vein_cfg: &VeinConfig,
) -> Result<IdentifyOutcome> {
    let (fv, mut timings) = extract_features(image, roi_cfg, vein_cfg)?;

    let t3 = Instant::now();
    let prediction = model.predict(fv.values())?;
    timings.predict_s = t3.elapsed().as_secs_f64();
    timings.total_s += timings.predict_s;

    let mut ranking: Vec<(usize, String, f64)> = model
        .classes
        .iter()
        .cloned()
        .zip(prediction.scores.iter().copied())
        .enumerate()
        .map(|(i, (label, score))| (i, label, score))
        .collect();
    ranking.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    Ok(IdentifyOutcome {
        ranking: ranking.into_iter().map(|(_, l, s)| (l, s)).collect(),
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(pig: &str, val: f64) -> GalleryRecord {
        GalleryRecord {
            version: GALLERY_VERSION,
            pig_id: pig.to_string(),
            source: format!("{pig}.png"),
            enrolled_at: "2026-01-01T00:00:00+00:00".to_string(),
            features: vec![val; FEATURE_LEN],
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gallery.jsonl");
        let g = Gallery {
            records: vec![record("pig_01", 0.5), record("pig_02", 1.5)],
        };
        g.save(&path).unwrap();
        let loaded = Gallery::load(&path).unwrap();
        assert_eq!(loaded, g);
    }

    #[test]
    fn empty_gallery_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gallery.jsonl");
        Gallery::new().save(&path).unwrap();
        let loaded = Gallery::load(&path).unwrap();
        assert!(loaded.is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gallery.jsonl");
        let good = serde_json::to_string(&record("pig_01", 0.0)).unwrap();
        std::fs::write(&path, format!("{good}\n{{\"v\":1,\"truncated\"\n")).unwrap();
        match Gallery::load(&path) {
            Err(Error::GalleryLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected GalleryLine error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gallery.jsonl");
        let mut bad = record("pig_01", 0.0);
        bad.version = 9;
        std::fs::write(&path, serde_json::to_string(&bad).unwrap() + "\n").unwrap();
        assert!(matches!(
            Gallery::load(&path),
            Err(Error::GalleryLine { line: 1, .. })
        ));
    }

    #[test]
    fn multi_template_enrollment_keeps_duplicates() {
        let g = Gallery {
            records: vec![record("pig_01", 0.0), record("pig_01", 1.0)],
        };
        assert_eq!(g.len(), 2);
        assert_eq!(g.pig_ids(), vec!["pig_01".to_string()]);
    }

    #[test]
    fn enroll_black_image_leaves_gallery_unchanged() {
        let mut g = Gallery::new();
        let img = RasterImage::new(64, 64);
        let err = enroll(
            &mut g,
            "pig_01",
            "black.png",
            &img,
            &RoiConfig::default(),
            &VeinConfig::default(),
        );
        assert!(err.is_err());
        assert!(g.is_empty());
    }
}
