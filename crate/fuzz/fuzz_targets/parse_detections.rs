#![no_main]

use cvbm::harness::pipeline::{evaluate_detections, parse_detections};
use cvbm::CameraIntrinsics;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let parsed = parse_detections(text);
    let lines = text.lines().filter(|l| !l.trim().is_empty()).count();
    assert_eq!(parsed.records.len() + parsed.malformed.len(), lines);
    if let Ok(report) = evaluate_detections(text, &CameraIntrinsics::default()) {
        for e in &report.estimates {
            assert!(e.position.is_finite() && e.r_m > 0.0);
        }
    }
});
