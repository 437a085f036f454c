use std::collections::BTreeMap;

use cvbm::harness::experiment::run_grid_experiment;
use cvbm::harness::output::{emit_heatmap_csv, emit_summary, parse_heatmap_csv, SummaryFormat};
use cvbm::{ExperimentConfig, LocalizationNoiseModel};
use serde_json::Value;

fn config(res: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.area.grid_resolution = res;
    cfg
}

#[test]
fn two_by_two_grid_gives_four_rows() {
    let r = run_grid_experiment(&config(2), false).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heatmap.csv");
    emit_heatmap_csv(&r.cells, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(parse_heatmap_csv(&text).unwrap().len(), 4);
}

#[test]
fn heatmap_round_trips_within_six_digits() {
    let r = run_grid_experiment(&config(15), false).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heatmap.csv");
    emit_heatmap_csv(&r.cells, &path).unwrap();
    let rows = parse_heatmap_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), r.cells.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 5e-6 * b.abs() + 1e-12;
    for (row, cell) in rows.iter().zip(&r.cells) {
        assert!(close(row.x_m, cell.x_m) && close(row.y_m, cell.y_m));
        assert!(close(row.rate_5gbm_bps, cell.five_g_bm.rate_bps));
        assert!(close(row.rate_cvbm_bps, cell.cvbm.rate_bps));
        assert!(close(row.gain_5gbm_db, cell.five_g_bm.gain_db));
        assert!(close(row.gain_cvbm_db, cell.cvbm.gain_db));
        assert_eq!(row.strategy_used, cell.strategy_used);
    }
}

#[test]
fn every_cell_once_and_finite() {
    let r = run_grid_experiment(&config(25), true).unwrap();
    let mut seen = std::collections::HashSet::new();
    for c in &r.cells {
        assert!(seen.insert((c.x_m.to_bits(), c.y_m.to_bits())));
        for v in [c.five_g_bm.rate_bps, c.cvbm.rate_bps, c.five_g_bm.gain_db, c.cvbm.gain_db] {
            assert!(v.is_finite());
        }
    }
    assert_eq!(seen.len(), 625);
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_owned(), other.to_string());
        }
    }
}

#[test]
fn text_and_json_summaries_agree() {
    let r = run_grid_experiment(&config(10), false).unwrap();
    let json: Value = serde_json::from_str(&emit_summary(&r.summary, SummaryFormat::Json)).unwrap();
    let mut from_json = BTreeMap::new();
    flatten("", &json, &mut from_json);

    let mut from_text = BTreeMap::new();
    let mut section = String::new();
    for line in emit_summary(&r.summary, SummaryFormat::Text).lines() {
        let line = line.split('#').next().unwrap().trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.to_owned();
        } else if let Some((k, v)) = line.split_once(" = ") {
            from_text.insert(format!("{section}.{k}"), v.to_owned());
        }
    }
    assert_eq!(from_text, from_json);
    assert!(from_json.len() > 20);
}

#[test]
fn zero_noise_summary_rows() {
    let mut cfg = config(4);
    cfg.noise = LocalizationNoiseModel::EXACT;
    let r = run_grid_experiment(&cfg, false).unwrap();
    let json: Value = serde_json::from_str(&emit_summary(&r.summary, SummaryFormat::Json)).unwrap();
    let num = |a: &str, b: &str| json[a][b].as_f64().unwrap();
    assert!((num("5g_bm", "mean_refinement_latency_ms") - 30.0).abs() < 1e-12);
    assert!((num("cvbm", "mean_refinement_latency_ms") - 15.8).abs() < 1e-12);
    assert_eq!(json["5g_bm"]["refinement_power_w"], 20.0);
    assert_eq!(json["cvbm"]["refinement_power_w"], 10.0);
    assert_eq!(json["comparison"]["cvbm_fallback_rate"], 0.0);
}

#[test]
fn noisy_cvbm_beats_codebook_in_aggregate() {
    let r = run_grid_experiment(&config(30), false).unwrap();
    let s = r.summary.ledger;
    assert!(s.cvbm.unwrap().mean_gain_linear > s.five_g_bm.unwrap().mean_gain_linear);
    assert!(s.cvbm_fallback_rate > 0.0 && s.cvbm_fallback_rate < 0.2);
}
