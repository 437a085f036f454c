//! Detections file to 3D estimates.
//!
//! Input is JSON lines, one detection per line:
//!
//! ```json
//! {"frame_id": 3, "class": "mobile", "bbox": [950, 530, 970, 550], "range_m": 5.0, "ground_truth": [0.0, 0.0, 5.0]}
//! ```
//!
//! `ground_truth` is optional. Unknown fields are ignored so detector
//! outputs carrying extra metadata (scores, track ids) load unchanged.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::geometry::{
    cartesian_to_spherical, detection_to_cartesian, localization_error_stats, BoundingBox, CameraIntrinsics,
    CartesianPoint, DetectionRecord, ErrorStats, ObjectClass, SphericalPoint,
};

#[derive(Deserialize)]
struct RawDetection {
    frame_id: u64,
    class: ObjectClass,
    bbox: [f64; 4],
    range_m: f64,
    #[serde(default)]
    ground_truth: Option<[f64; 3]>,
}

/// Parses and validates one line.
pub fn parse_detection_line(line: &str) -> Result<DetectionRecord, HarnessError> {
    let raw: RawDetection = serde_json::from_str(line).map_err(|e| HarnessError::Parse(e.to_string()))?;
    let [u0, v0, u1, v1] = raw.bbox;
    let bbox = BoundingBox::new(u0, v0, u1, v1)?;
    let gt = raw.ground_truth.map(|[x, y, z]| CartesianPoint::new(x, y, z));
    Ok(DetectionRecord::new(raw.frame_id, raw.class, bbox, raw.range_m, gt)?)
}

#[derive(Debug, Default)]
pub struct ParsedDetections {
    /// `(line number, record)`, 1-based.
    pub records: Vec<(usize, DetectionRecord)>,
    /// `(line number, diagnostic)` for lines that failed to parse.
    pub malformed: Vec<(usize, String)>,
}

/// Parses every non-blank line, collecting failures instead of stopping.
pub fn parse_detections(text: &str) -> ParsedDetections {
    let mut out = ParsedDetections::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_detection_line(line) {
            Ok(rec) => out.records.push((i + 1, rec)),
            Err(e) => out.malformed.push((i + 1, e.to_string())),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizedRecord {
    pub line: usize,
    pub frame_id: u64,
    pub position: CartesianPoint,
    pub r_m: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<CartesianPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_cm: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub estimates: Vec<LocalizedRecord>,
    /// Present when at least one mobile record carried a ground truth.
    pub stats: Option<ErrorStats>,
    pub person_records: usize,
    /// `(line number, diagnostic)` for skipped lines, in file order.
    pub warnings: Vec<(usize, String)>,
}

impl PipelineReport {
    pub fn warning_count(&self) -> usize {
        self.warnings.len()
    }
}

fn localize(line: usize, rec: &DetectionRecord, cam: &CameraIntrinsics) -> Result<LocalizedRecord, HarnessError> {
    let position = detection_to_cartesian(rec, cam)?;
    let SphericalPoint { r, theta, phi } = cartesian_to_spherical(&position)?;
    Ok(LocalizedRecord {
        line,
        frame_id: rec.frame_id,
        position,
        r_m: r,
        theta_deg: theta.to_degrees(),
        phi_deg: phi.to_degrees(),
        ground_truth: rec.ground_truth,
        error_cm: rec.ground_truth.map(|gt| position.distance(&gt) * 100.0),
    })
}

/// Localizes every mobile-class record in `text`. Malformed lines and
/// records that cannot be localized are skipped and reported as warnings.
pub fn evaluate_detections(text: &str, cam: &CameraIntrinsics) -> Result<PipelineReport, HarnessError> {
    cam.validate()?;
    let parsed = parse_detections(text);
    let mut warnings = parsed.malformed;
    let mut estimates = Vec::new();
    let mut person_records = 0;
    let mut mobile_records = 0;
    for (line, rec) in &parsed.records {
        match rec.class_label {
            ObjectClass::Person => {
                person_records += 1;
                log::debug!("line {line}: person detection in frame {}, not localized", rec.frame_id);
            }
            ObjectClass::Mobile => {
                mobile_records += 1;
                match localize(*line, rec, cam) {
                    Ok(est) => estimates.push(est),
                    Err(e) => warnings.push((*line, e.to_string())),
                }
            }
        }
    }
    warnings.sort_by_key(|w| w.0);
    for (line, msg) in &warnings {
        log::warn!("line {line}: skipped: {msg}");
    }
    if mobile_records == 0 {
        return Err(HarnessError::EmptyInput("no mobile-class detections".into()));
    }
    let pairs: Vec<(CartesianPoint, CartesianPoint)> =
        estimates.iter().filter_map(|e| e.ground_truth.map(|gt| (e.position, gt))).collect();
    let stats = if pairs.is_empty() { None } else { Some(localization_error_stats(&pairs)?) };
    Ok(PipelineReport { estimates, stats, person_records, warnings })
}

pub fn run_detection_pipeline(path: &Path, cfg: &ExperimentConfig) -> Result<PipelineReport, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    evaluate_detections(&text, &cfg.camera)
}

/// One JSON line per estimate.
pub fn write_estimates<W: Write>(mut out: W, estimates: &[LocalizedRecord]) -> std::io::Result<()> {
    for e in estimates {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
