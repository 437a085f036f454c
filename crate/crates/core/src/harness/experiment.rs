//! Grid experiment: both strategies evaluated at every user position.
//!
//! Layout: the BS sits at `(0, 0)`, the midpoint of the near edge of a
//! `width x depth` area, with boresight along `+y` into the area. Grid points
//! are cell centers, `x_i = -w/2 + (i + 1/2) w/n` and
//! `y_j = (j + 1/2) d/n`, and map into the BS/camera frame as
//! `(x_i, height_offset, y_j)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::array::{self, ArrayGeometry, BeamWeights};
use crate::channel::{self, LinkBudget};
use crate::geometry::{cartesian_to_spherical, CartesianPoint, SphericalPoint};
use crate::protocol::{self, BeamSession, SessionContext, SessionTrace, Strategy, Summary};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream used for CVBM localization draws.
pub const CVBM_STREAM: u64 = 1;

/// Counter-based sub-seed for grid cell `cell` on RNG stream `stream`:
///
/// `s = splitmix64(master + (stream + 1) * G)`,
/// `seed = splitmix64(s + (cell + 1) * G)`, with `G = 0x9e3779b97f4a7c15`.
///
/// Depends only on its arguments, so cell results do not depend on
/// evaluation order.
pub fn derive_seed(master: u64, cell: u64, stream: u64) -> u64 {
    let s = splitmix64(master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream.wrapping_add(1))));
    splitmix64(s.wrapping_add(GOLDEN_GAMMA.wrapping_mul(cell.wrapping_add(1))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub x_m: f64,
    pub y_m: f64,
}

/// Grid points in `(y, x)` order.
pub fn grid_points(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let n = cfg.area.grid_resolution;
    let (w, d) = (cfg.area.width_m, cfg.area.depth_m);
    (0..n)
        .flat_map(|j| {
            (0..n).map(move |i| GridPoint {
                index: j * n + i,
                x_m: -w / 2.0 + (i as f64 + 0.5) * w / n as f64,
                y_m: (j as f64 + 0.5) * d / n as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub gain_linear: f64,
    pub gain_db: f64,
    pub rsrp_dbm: f64,
    pub snr_db: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateMapCell {
    pub x_m: f64,
    pub y_m: f64,
    pub five_g_bm: StrategyOutcome,
    pub cvbm: StrategyOutcome,
    /// `cvbm` or `cvbm_fallback`.
    pub strategy_used: Strategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub cells: usize,
    pub seed: u64,
    pub ledger: Summary,
    pub power_5gbm_w: f64,
    pub power_cvbm_w: f64,
    pub mean_rate_5gbm_bps: f64,
    pub mean_rate_cvbm_bps: f64,
    /// Fraction of cells where the CVBM rate is at least the 5G-BM rate.
    pub cvbm_rate_dominance: f64,
    /// Mean range-controlled CVBM transmit power over successful fixes.
    pub cvbm_mean_tx_power_dbm: Option<f64>,
    pub target_gain_improvement: f64,
    pub target_overhead_reduction: f64,
}

/// Reference figures the comparison is reported against.
pub const TARGET_GAIN_IMPROVEMENT: f64 = 0.40;
pub const TARGET_OVERHEAD_REDUCTION: f64 = 0.40;

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub cells: Vec<RateMapCell>,
    pub traces: Vec<SessionTrace>,
    pub summary: ExperimentSummary,
}

struct Link<'a> {
    bs: ArrayGeometry,
    ue: ArrayGeometry,
    rx: BeamWeights,
    budget: &'a LinkBudget,
}

impl Link<'_> {
    fn outcome(&self, truth: &SphericalPoint, session: &BeamSession) -> Result<StrategyOutcome, HarnessError> {
        let h = channel::los_channel(&self.bs, &self.ue, truth, self.budget)?;
        let rsrp_dbm = channel::rsrp(&h, &session.chosen_beam, &self.rx, self.budget.tx_power_dbm_max)?;
        let q = channel::snr_and_rate(rsrp_dbm, self.budget);
        Ok(StrategyOutcome {
            gain_linear: session.effective_gain_linear,
            gain_db: session.effective_gain_db(),
            rsrp_dbm,
            snr_db: q.snr_db,
            rate_bps: q.rate_bps,
        })
    }
}

struct CellEval {
    cell: RateMapCell,
    five_g: BeamSession,
    cvbm: BeamSession,
    tx_power_dbm: Option<f64>,
}

fn evaluate_cell(
    cfg: &ExperimentConfig,
    ctx: &SessionContext<'_>,
    link: &Link<'_>,
    p: &GridPoint,
) -> Result<CellEval, HarnessError> {
    let point = CartesianPoint::new(p.x_m, cfg.area.height_offset_m, p.y_m);
    let truth = cartesian_to_spherical(&point)?;
    let five_g = ctx.run_5gbm(&truth)?;
    let cvbm = ctx.run_cvbm(&truth, &cfg.noise, derive_seed(cfg.seed, p.index as u64, CVBM_STREAM))?;
    let tx_power_dbm = match cvbm.estimate {
        Some(est) if est.r > 0.0 => {
            let gain = (link.bs.num_elements() * link.ue.num_elements()) as f64;
            Some(channel::power_control(est.r, cfg.link.target_rsrp_dbm, &cfg.link, gain)?)
        }
        _ => None,
    };
    let cell = RateMapCell {
        x_m: p.x_m,
        y_m: p.y_m,
        five_g_bm: link.outcome(&truth, &five_g)?,
        cvbm: link.outcome(&truth, &cvbm)?,
        strategy_used: cvbm.strategy,
    };
    Ok(CellEval { cell, five_g, cvbm, tx_power_dbm })
}

/// Runs both strategies at every grid point. Output is a pure function of
/// `cfg`; `parallel` only changes how cells are scheduled.
pub fn run_grid_experiment(cfg: &ExperimentConfig, parallel: bool) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let codebook = cfg.array.codebook()?;
    let ctx = SessionContext::new(&codebook, &cfg.ssb, &cfg.protocol);
    let link = Link {
        bs: cfg.array.bs(),
        ue: cfg.array.ue(),
        rx: array::steering_vector_upa(&cfg.array.ue(), 0.0, 0.0)?,
        budget: &cfg.link,
    };
    let points = grid_points(cfg);
    let eval = |p: &GridPoint| {
        evaluate_cell(cfg, &ctx, &link, p).map_err(|e| HarnessError::Cell {
            x_m: p.x_m,
            y_m: p.y_m,
            source: Box::new(e),
        })
    };
    let evals: Vec<CellEval> = if parallel {
        points.par_iter().map(eval).collect::<Result<_, _>>()?
    } else {
        points.iter().map(eval).collect::<Result<_, _>>()?
    };

    let mut cells = Vec::with_capacity(evals.len());
    let mut sessions = Vec::with_capacity(2 * evals.len());
    let mut traces = Vec::with_capacity(2 * evals.len());
    let mut tx_powers = Vec::new();
    for (p, e) in points.iter().zip(evals) {
        traces.push(SessionTrace::from_session(&e.five_g, Some(p.index)));
        traces.push(SessionTrace::from_session(&e.cvbm, Some(p.index)));
        cells.push(e.cell);
        sessions.push(e.five_g);
        sessions.push(e.cvbm);
        tx_powers.extend(e.tx_power_dbm);
    }
    let ledger = protocol::ledger_summary(&sessions)?;
    let n = cells.len() as f64;
    let summary = ExperimentSummary {
        cells: cells.len(),
        seed: cfg.seed,
        ledger,
        power_5gbm_w: cfg.protocol.power_5gbm_w,
        power_cvbm_w: cfg.protocol.power_cvbm_w,
        mean_rate_5gbm_bps: cells.iter().map(|c| c.five_g_bm.rate_bps).sum::<f64>() / n,
        mean_rate_cvbm_bps: cells.iter().map(|c| c.cvbm.rate_bps).sum::<f64>() / n,
        cvbm_rate_dominance: cells.iter().filter(|c| c.cvbm.rate_bps >= c.five_g_bm.rate_bps).count() as f64 / n,
        cvbm_mean_tx_power_dbm: (!tx_powers.is_empty()).then(|| tx_powers.iter().sum::<f64>() / tx_powers.len() as f64),
        target_gain_improvement: TARGET_GAIN_IMPROVEMENT,
        target_overhead_reduction: TARGET_OVERHEAD_REDUCTION,
    };
    Ok(ExperimentResult { cells, traces, summary })
}
