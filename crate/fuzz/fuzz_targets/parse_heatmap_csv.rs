#![no_main]

use cvbm::harness::output::parse_heatmap_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_heatmap_csv(text) {
        for r in rows {
            assert!([r.x_m, r.y_m, r.rate_5gbm_bps, r.rate_cvbm_bps, r.gain_5gbm_db, r.gain_cvbm_db]
                .iter()
                .all(|v| v.is_finite()));
        }
    }
});
