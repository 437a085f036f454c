//! Heatmap CSV and run summaries.
//!
//! Every float written here goes through [`format_sig6`], so identical
//! results give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use super::experiment::{ExperimentSummary, RateMapCell};
use super::HarnessError;
use crate::protocol::{SchemeStats, Strategy};

pub const HEATMAP_HEADER: &str = "x_m,y_m,rate_5gbm_bps,rate_cvbm_bps,gain_5gbm_db,gain_cvbm_db,strategy_used";

/// Six significant digits. Fixed notation for magnitudes in `[1e-5, 1e6)`,
/// scientific otherwise. Trailing zeros are kept so column widths are stable.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".to_owned();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        format!("{v:.*}", (5 - exp) as usize)
    } else {
        sci
    }
}

/// Writes the heatmap, rows sorted by `(y, x)`.
pub fn write_heatmap_csv<W: Write>(mut out: W, cells: &[RateMapCell]) -> Result<(), HarnessError> {
    if cells.is_empty() {
        return Err(HarnessError::EmptyInput("heatmap has no cells".into()));
    }
    let mut rows: Vec<&RateMapCell> = cells.iter().collect();
    rows.sort_by(|a, b| a.y_m.total_cmp(&b.y_m).then(a.x_m.total_cmp(&b.x_m)));
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(HEATMAP_HEADER);
    text.push('\n');
    for c in rows {
        let fields = [c.x_m, c.y_m, c.five_g_bm.rate_bps, c.cvbm.rate_bps, c.five_g_bm.gain_db, c.cvbm.gain_db];
        if let Some(bad) = fields.iter().find(|v| !v.is_finite()) {
            return Err(HarnessError::Validation(format!(
                "non-finite value {bad} in cell (x = {} m, y = {} m)",
                c.x_m, c.y_m
            )));
        }
        for v in fields {
            text.push_str(&format_sig6(v));
            text.push(',');
        }
        text.push_str(c.strategy_used.as_str());
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(|e| HarnessError::Io { path: "<heatmap>".into(), source: e })
}

pub fn emit_heatmap_csv(cells: &[RateMapCell], path: &Path) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    write_heatmap_csv(&mut buf, cells)?;
    std::fs::write(path, buf).map_err(|e| HarnessError::io(path, e))
}

/// One parsed heatmap row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapRow {
    pub x_m: f64,
    pub y_m: f64,
    pub rate_5gbm_bps: f64,
    pub rate_cvbm_bps: f64,
    pub gain_5gbm_db: f64,
    pub gain_cvbm_db: f64,
    pub strategy_used: Strategy,
}

/// Parses a heatmap written by [`write_heatmap_csv`].
pub fn parse_heatmap_csv(text: &str) -> Result<Vec<HeatmapRow>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == HEATMAP_HEADER => {}
        Some((_, h)) => return Err(HarnessError::Parse(format!("line 1: unexpected header `{h}`"))),
        None => return Err(HarnessError::Parse("empty heatmap".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.trim_end().split(',').collect();
        if cols.len() != 7 {
            return Err(HarnessError::Parse(format!("line {line_no}: expected 7 columns, found {}", cols.len())));
        }
        let mut nums = [0.0f64; 6];
        for (k, (slot, raw)) in nums.iter_mut().zip(&cols).enumerate() {
            *slot =
                raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    HarnessError::Parse(format!("line {line_no}, column {}: bad number `{raw}`", k + 1))
                })?;
        }
        let strategy_used =
            cols[6].parse::<Strategy>().map_err(|e| HarnessError::Parse(format!("line {line_no}, column 7: {e}")))?;
        let [x_m, y_m, rate_5gbm_bps, rate_cvbm_bps, gain_5gbm_db, gain_cvbm_db] = nums;
        rows.push(HeatmapRow { x_m, y_m, rate_5gbm_bps, rate_cvbm_bps, gain_5gbm_db, gain_cvbm_db, strategy_used });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryFormat {
    Text,
    Json,
}

fn scheme_json(s: &Option<SchemeStats>, power_w: f64) -> Value {
    match s {
        None => Value::Null,
        Some(s) => json!({
            "sessions": s.sessions,
            "mean_gain_db": s.mean_gain_db,
            "mean_gain_linear": s.mean_gain_linear,
            "mean_latency_ms": s.mean_latency_ms,
            "mean_refinement_latency_ms": s.mean_refinement_latency_ms,
            "mean_energy_j": s.mean_energy_j,
            "mean_refinement_energy_j": s.mean_refinement_energy_j,
            "refinement_power_w": power_w,
        }),
    }
}

fn summary_value(s: &ExperimentSummary) -> Value {
    let l = &s.ledger;
    json!({
        "run": { "cells": s.cells, "seed": s.seed },
        "5g_bm": scheme_json(&l.five_g_bm, s.power_5gbm_w),
        "cvbm": scheme_json(&l.cvbm, s.power_cvbm_w),
        "rates": {
            "mean_rate_5gbm_bps": s.mean_rate_5gbm_bps,
            "mean_rate_cvbm_bps": s.mean_rate_cvbm_bps,
            "cvbm_rate_dominance": s.cvbm_rate_dominance,
            "cvbm_mean_tx_power_dbm": s.cvbm_mean_tx_power_dbm,
        },
        "comparison": {
            "cvbm_fallback_rate": l.cvbm_fallback_rate,
            "overhead_reduction": l.overhead_reduction,
            "overhead_reduction_with_burst": l.overhead_reduction_with_burst,
            "energy_reduction": l.energy_reduction,
            "gain_improvement": l.gain_improvement,
            "target_overhead_reduction": s.target_overhead_reduction,
            "target_gain_improvement": s.target_gain_improvement,
        },
    })
}

/// Fractions that also get a percentage comment in the text form.
const PERCENT_KEYS: [&str; 8] = [
    "cvbm_rate_dominance",
    "cvbm_fallback_rate",
    "overhead_reduction",
    "overhead_reduction_with_burst",
    "energy_reduction",
    "gain_improvement",
    "target_gain_improvement",
    "target_overhead_reduction",
];

/// Renders the summary. Both formats carry the same numbers: the text form
/// is `key = value` lines grouped under `[section]` headers, with each value
/// printed exactly as the JSON form prints it.
pub fn emit_summary(summary: &ExperimentSummary, format: SummaryFormat) -> String {
    let value = summary_value(summary);
    match format {
        SummaryFormat::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("summary serializes");
            s.push('\n');
            s
        }
        SummaryFormat::Text => {
            let mut out = String::from("# 5G-BM vs CVBM beam management\n");
            let sections = value.as_object().expect("object");
            for (name, body) in sections {
                let _ = writeln!(out, "\n[{name}]");
                let Some(fields) = body.as_object() else {
                    let _ = writeln!(out, "# no sessions");
                    continue;
                };
                for (key, v) in fields {
                    let _ = write!(out, "{key} = {v}");
                    if let Some(f) = v.as_f64().filter(|_| PERCENT_KEYS.contains(&key.as_str())) {
                        let _ = write!(out, "  # {:.2} %", 100.0 * f);
                    }
                    out.push('\n');
                }
            }
            out
        }
    }
}
