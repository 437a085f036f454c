//! Per-session beam-management state machines and their latency/energy ledger.
//!
//! A 5G-BM session is an SSB sweep followed by CSI-RS refinement over the
//! codewords that point into the selected SSB sector. A CVBM session shares
//! the sweep, then steers directly at a noisy position fix; a missed
//! detection falls back to CSI-RS refinement.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::array::{self, ArrayError, BeamWeights, Codebook};
use crate::geometry::{self, LocalizationNoiseModel, SphericalPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("mobile at azimuth {az_deg:.3} deg, elevation {el_deg:.3} deg is outside the SSB sector grid")]
    OutOfSector { az_deg: f64, el_deg: f64 },
    #[error("no codeword points into SSB sector {0}")]
    EmptyCandidateSet(usize),
    #[error("SSB index {index} outside a grid of {cells} cells")]
    InvalidSsbIndex { index: usize, cells: usize },
    #[error("no sessions to summarize")]
    EmptyInput,
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Array(#[from] ArrayError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ProtocolError {
    ProtocolError::Invalid { field, reason: reason.into() }
}

/// Wide-beam SSB sector grid in (azimuth, elevation) degrees.
///
/// Cell `el_idx * n_az + az_idx` covers `(start + idx*w, start + (idx+1)*w]`
/// on each axis; the lowest cell also includes its lower edge. A direction
/// on a shared boundary therefore belongs to the lower-index cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsbGrid {
    pub n_az: usize,
    pub n_el: usize,
    pub az_span_deg: f64,
    pub el_span_deg: f64,
    pub az_start_deg: f64,
    pub el_start_deg: f64,
    pub burst_ms: f64,
    pub period_ms: f64,
}

impl Default for SsbGrid {
    fn default() -> Self {
        Self {
            n_az: 8,
            n_el: 4,
            az_span_deg: 360.0,
            el_span_deg: 180.0,
            az_start_deg: -180.0,
            el_start_deg: -90.0,
            burst_ms: 5.0,
            period_ms: 20.0,
        }
    }
}

/// Largest SSB burst set.
pub const MAX_SSB_BEAMS: usize = 64;

impl SsbGrid {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n_az == 0 || self.n_el == 0 {
            return Err(invalid("ssb.n_az/n_el", "must be >= 1"));
        }
        if self.n_az * self.n_el > MAX_SSB_BEAMS {
            return Err(invalid("ssb.n_az/n_el", format!("n_az * n_el must be <= {MAX_SSB_BEAMS}")));
        }
        for (v, field) in [(self.az_span_deg, "ssb.az_span_deg"), (self.el_span_deg, "ssb.el_span_deg")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, "span must be finite and > 0"));
            }
        }
        for (v, field) in [(self.az_start_deg, "ssb.az_start_deg"), (self.el_start_deg, "ssb.el_start_deg")] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        for (v, field) in [(self.burst_ms, "ssb.burst_ms"), (self.period_ms, "ssb.period_ms")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.n_az * self.n_el
    }

    pub fn cell_width_deg(&self) -> (f64, f64) {
        (self.az_span_deg / self.n_az as f64, self.el_span_deg / self.n_el as f64)
    }

    fn axis_index(value: f64, start: f64, span: f64, n: usize) -> Option<usize> {
        if !(value >= start && value <= start + span) {
            return None;
        }
        let w = span / n as f64;
        let k = ((value - start) / w).ceil() as isize - 1;
        Some(k.clamp(0, n as isize - 1) as usize)
    }

    /// Cell containing the direction, or `None` outside the grid.
    pub fn cell_of(&self, az_deg: f64, el_deg: f64) -> Option<usize> {
        let a = Self::axis_index(az_deg, self.az_start_deg, self.az_span_deg, self.n_az)?;
        let e = Self::axis_index(el_deg, self.el_start_deg, self.el_span_deg, self.n_el)?;
        Some(e * self.n_az + a)
    }

    /// Cell touching boresight from below on both axes.
    pub fn center_index(&self) -> Option<usize> {
        self.cell_of(0.0, 0.0)
    }

    /// `((az_lo, az_hi), (el_lo, el_hi))` in degrees.
    pub fn sector_bounds(&self, index: usize) -> ((f64, f64), (f64, f64)) {
        let (wa, we) = self.cell_width_deg();
        let (a, e) = ((index % self.n_az) as f64, (index / self.n_az) as f64);
        (
            (self.az_start_deg + a * wa, self.az_start_deg + (a + 1.0) * wa),
            (self.el_start_deg + e * we, self.el_start_deg + (e + 1.0) * we),
        )
    }
}

/// Timing and power constants for both strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub csi_rs_period_ms: f64,
    pub csi_rs_beams_per_round: usize,
    pub refinement_ms: f64,
    pub cvbm_inference_ms: f64,
    pub power_5gbm_w: f64,
    pub power_cvbm_w: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            csi_rs_period_ms: 10.0,
            csi_rs_beams_per_round: 4,
            refinement_ms: 30.0,
            cvbm_inference_ms: 15.8,
            power_5gbm_w: 20.0,
            power_cvbm_w: 10.0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.csi_rs_beams_per_round == 0 {
            return Err(invalid("protocol.csi_rs_beams_per_round", "must be >= 1"));
        }
        for (v, field) in [
            (self.csi_rs_period_ms, "protocol.csi_rs_period_ms"),
            (self.refinement_ms, "protocol.refinement_ms"),
            (self.cvbm_inference_ms, "protocol.cvbm_inference_ms"),
            (self.power_5gbm_w, "protocol.power_5gbm_w"),
            (self.power_cvbm_w, "protocol.power_cvbm_w"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(field, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// Which part of beam training an event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// SSB burst, shared by both strategies.
    Sweep,
    /// CSI-RS refinement or vision inference.
    Refinement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub label: String,
    pub phase: Phase,
    pub duration_ms: f64,
    pub power_w: f64,
}

impl LedgerEvent {
    pub fn new(label: impl Into<String>, phase: Phase, duration_ms: f64, power_w: f64) -> Self {
        debug_assert!(duration_ms >= 0.0 && power_w >= 0.0);
        Self { label: label.into(), phase, duration_ms, power_w }
    }

    /// Energy in millijoules.
    fn energy_mj(&self) -> f64 {
        self.duration_ms * self.power_w
    }
}

/// Ordered session timeline. Totals are always recomputed from the events.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLedger {
    events: Vec<LedgerEvent>,
}

impl EventLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: LedgerEvent) {
        self.events.push(event);
    }

    pub fn extend(&mut self, events: impl IntoIterator<Item = LedgerEvent>) {
        self.events.extend(events);
    }

    pub fn events(&self) -> &[LedgerEvent] {
        &self.events
    }

    pub fn total_latency_ms(&self) -> f64 {
        self.events.iter().map(|e| e.duration_ms).sum()
    }

    pub fn total_energy_j(&self) -> f64 {
        self.events.iter().map(LedgerEvent::energy_mj).sum::<f64>() / 1000.0
    }

    pub fn phase_latency_ms(&self, phase: Phase) -> f64 {
        self.events.iter().filter(|e| e.phase == phase).map(|e| e.duration_ms).sum()
    }

    pub fn phase_energy_j(&self, phase: Phase) -> f64 {
        self.events.iter().filter(|e| e.phase == phase).map(LedgerEvent::energy_mj).sum::<f64>() / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "5g_bm")]
    FiveGBm,
    #[serde(rename = "cvbm")]
    Cvbm,
    #[serde(rename = "cvbm_fallback")]
    CvbmFallback,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::FiveGBm => "5g_bm",
            Strategy::Cvbm => "cvbm",
            Strategy::CvbmFallback => "cvbm_fallback",
        }
    }

    pub fn is_cvbm_scheme(&self) -> bool {
        !matches!(self, Strategy::FiveGBm)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "5g_bm" => Ok(Strategy::FiveGBm),
            "cvbm" => Ok(Strategy::Cvbm),
            "cvbm_fallback" => Ok(Strategy::CvbmFallback),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSession {
    pub strategy: Strategy,
    pub chosen_beam: BeamWeights,
    /// Codebook index when the beam came from the codebook.
    pub codeword_index: Option<usize>,
    pub ssb_index: usize,
    /// Vision fix used for steering, CVBM only.
    pub estimate: Option<SphericalPoint>,
    pub ledger: EventLedger,
    /// Array gain of the chosen beam toward the true direction.
    pub effective_gain_linear: f64,
}

impl BeamSession {
    pub fn effective_gain_db(&self) -> f64 {
        linear_to_db(self.effective_gain_linear)
    }
}

/// `10 log10(x)`, floored at -300 dB.
pub fn linear_to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(-300.0)
    } else {
        -300.0
    }
}

/// Selects the SSB sector containing the true direction.
pub fn ssb_sweep(
    grid: &SsbGrid,
    truth: &SphericalPoint,
    cfg: &ProtocolConfig,
) -> Result<(usize, Vec<LedgerEvent>), ProtocolError> {
    let (az_deg, el_deg) = truth.az_el_deg();
    let index = grid.cell_of(az_deg, el_deg).ok_or(ProtocolError::OutOfSector { az_deg, el_deg })?;
    let event = LedgerEvent::new("ssb burst", Phase::Sweep, grid.burst_ms, cfg.power_5gbm_w);
    Ok((index, vec![event]))
}

/// Visible codewords whose lattice direction falls in SSB cell `ssb_index`.
pub fn csi_rs_candidates(cb: &Codebook, grid: &SsbGrid, ssb_index: usize) -> Vec<usize> {
    cb.visible_indices().filter(|&i| codeword_cell(cb, grid, i) == Some(ssb_index)).collect()
}

/// SSB cell of a codeword, from its lattice direction cosines. Going through
/// `(theta, phi)` would put codewords on a sector edge off by an ulp.
fn codeword_cell(cb: &Codebook, grid: &SsbGrid, index: usize) -> Option<usize> {
    let (u_h, u_v) = cb.grid()[index];
    let u_z = (1.0 - u_h * u_h - u_v * u_v).max(0.0).sqrt();
    let az = u_h.atan2(u_z).to_degrees();
    let el = u_v.clamp(-1.0, 1.0).asin().to_degrees();
    grid.cell_of(az, el)
}

/// Precomputed CSI-RS candidate list per SSB cell.
#[derive(Debug, Clone)]
pub struct SectorPartition {
    by_cell: Vec<Vec<usize>>,
}

impl SectorPartition {
    pub fn new(cb: &Codebook, grid: &SsbGrid) -> Self {
        let mut by_cell = vec![Vec::new(); grid.cells()];
        for i in cb.visible_indices() {
            if let Some(cell) = codeword_cell(cb, grid, i) {
                by_cell[cell].push(i);
            }
        }
        Self { by_cell }
    }

    pub fn candidates(&self, ssb_index: usize) -> &[usize] {
        self.by_cell.get(ssb_index).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub codeword_index: usize,
    pub gain_linear: f64,
    pub events: Vec<LedgerEvent>,
}

fn refinement_events(cfg: &ProtocolConfig) -> Vec<LedgerEvent> {
    let n = cfg.csi_rs_beams_per_round;
    let slot = cfg.refinement_ms / n as f64;
    let mut spent = 0.0;
    (0..n)
        .map(|k| {
            let d = if k + 1 == n { cfg.refinement_ms - spent } else { slot };
            spent += d;
            LedgerEvent::new(format!("csi-rs beam {}", k + 1), Phase::Refinement, d, cfg.power_5gbm_w)
        })
        .collect()
}

/// Genie RSRP-argmax over the in-sector codewords, charged as one refinement round.
pub fn csi_rs_refine(
    cb: &Codebook,
    ssb_index: usize,
    grid: &SsbGrid,
    truth: &SphericalPoint,
    cfg: &ProtocolConfig,
) -> Result<Refinement, ProtocolError> {
    if ssb_index >= grid.cells() {
        return Err(ProtocolError::InvalidSsbIndex { index: ssb_index, cells: grid.cells() });
    }
    refine_over(cb, &csi_rs_candidates(cb, grid, ssb_index), ssb_index, truth, cfg)
}

fn refine_over(
    cb: &Codebook,
    candidates: &[usize],
    ssb_index: usize,
    truth: &SphericalPoint,
    cfg: &ProtocolConfig,
) -> Result<Refinement, ProtocolError> {
    let (codeword_index, gain_linear) = array::best_among(cb, candidates.iter().copied(), truth.theta, truth.phi)?
        .ok_or(ProtocolError::EmptyCandidateSet(ssb_index))?;
    Ok(Refinement { codeword_index, gain_linear, events: refinement_events(cfg) })
}

/// Shared read-only context for running many sessions.
#[derive(Debug, Clone)]
pub struct SessionContext<'a> {
    pub codebook: &'a Codebook,
    pub grid: &'a SsbGrid,
    pub cfg: &'a ProtocolConfig,
    partition: Option<SectorPartition>,
}

impl<'a> SessionContext<'a> {
    pub fn new(codebook: &'a Codebook, grid: &'a SsbGrid, cfg: &'a ProtocolConfig) -> Self {
        let partition = Some(SectorPartition::new(codebook, grid));
        Self { codebook, grid, cfg, partition }
    }

    fn refine(&self, ssb_index: usize, truth: &SphericalPoint) -> Result<Refinement, ProtocolError> {
        match &self.partition {
            Some(p) => refine_over(self.codebook, p.candidates(ssb_index), ssb_index, truth, self.cfg),
            None => csi_rs_refine(self.codebook, ssb_index, self.grid, truth, self.cfg),
        }
    }

    pub fn run_5gbm(&self, truth: &SphericalPoint) -> Result<BeamSession, ProtocolError> {
        let (ssb_index, sweep) = ssb_sweep(self.grid, truth, self.cfg)?;
        let refinement = self.refine(ssb_index, truth)?;
        Ok(codebook_session(Strategy::FiveGBm, self.codebook, ssb_index, sweep, refinement))
    }

    pub fn run_cvbm(
        &self,
        truth: &SphericalPoint,
        noise: &LocalizationNoiseModel,
        seed: u64,
    ) -> Result<BeamSession, ProtocolError> {
        let (ssb_index, sweep) = ssb_sweep(self.grid, truth, self.cfg)?;
        let estimate = match geometry::apply_localization_noise(truth, noise, seed) {
            Ok(fix) => fix,
            Err(geometry::DetectionFailure) => {
                let refinement = self.refine(ssb_index, truth)?;
                return Ok(codebook_session(Strategy::CvbmFallback, self.codebook, ssb_index, sweep, refinement));
            }
        };
        let geom = self.codebook.geometry();
        let chosen_beam = array::steering_vector_upa(geom, estimate.theta, estimate.phi)?;
        let effective_gain_linear = array::array_gain(&chosen_beam, geom, truth.theta, truth.phi)?;
        let mut ledger = EventLedger::new();
        ledger.extend(sweep);
        ledger.push(LedgerEvent::new(
            "vision inference",
            Phase::Refinement,
            self.cfg.cvbm_inference_ms,
            self.cfg.power_cvbm_w,
        ));
        Ok(BeamSession {
            strategy: Strategy::Cvbm,
            chosen_beam,
            codeword_index: None,
            ssb_index,
            estimate: Some(estimate),
            ledger,
            effective_gain_linear,
        })
    }
}

fn codebook_session(
    strategy: Strategy,
    cb: &Codebook,
    ssb_index: usize,
    sweep: Vec<LedgerEvent>,
    refinement: Refinement,
) -> BeamSession {
    let mut ledger = EventLedger::new();
    ledger.extend(sweep);
    ledger.extend(refinement.events);
    BeamSession {
        strategy,
        chosen_beam: cb.codeword(refinement.codeword_index).clone(),
        codeword_index: Some(refinement.codeword_index),
        ssb_index,
        estimate: None,
        ledger,
        effective_gain_linear: refinement.gain_linear,
    }
}

pub fn run_5gbm_session(
    truth: &SphericalPoint,
    grid: &SsbGrid,
    cb: &Codebook,
    cfg: &ProtocolConfig,
) -> Result<BeamSession, ProtocolError> {
    SessionContext { codebook: cb, grid, cfg, partition: None }.run_5gbm(truth)
}

pub fn run_cvbm_session(
    truth: &SphericalPoint,
    grid: &SsbGrid,
    noise: &LocalizationNoiseModel,
    cb: &Codebook,
    cfg: &ProtocolConfig,
    seed: u64,
) -> Result<BeamSession, ProtocolError> {
    SessionContext { codebook: cb, grid, cfg, partition: None }.run_cvbm(truth, noise, seed)
}

/// Per-scheme session averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeStats {
    pub sessions: usize,
    pub mean_latency_ms: f64,
    pub mean_refinement_latency_ms: f64,
    pub mean_energy_j: f64,
    pub mean_refinement_energy_j: f64,
    pub mean_gain_linear: f64,
    /// Mean of per-session gains in dB.
    pub mean_gain_db: f64,
}

/// Neumaier-compensated running sum, so means over many identical sessions
/// reproduce the per-session value.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl std::ops::AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, v: f64) {
        let t = self.sum + v;
        self.carry += if self.sum.abs() >= v.abs() { (self.sum - t) + v } else { (v - t) + self.sum };
        self.sum = t;
    }
}

impl SchemeStats {
    fn from_sessions<'a>(sessions: impl Iterator<Item = &'a BeamSession>) -> Option<Self> {
        let mut n = 0usize;
        let mut acc = [CompensatedSum::default(); 6];
        for s in sessions {
            n += 1;
            let l = &s.ledger;
            let row = [
                l.total_latency_ms(),
                l.phase_latency_ms(Phase::Refinement),
                l.total_energy_j(),
                l.phase_energy_j(Phase::Refinement),
                s.effective_gain_linear,
                s.effective_gain_db(),
            ];
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        if n == 0 {
            return None;
        }
        let m = acc.map(|a| (a.sum + a.carry) / n as f64);
        Some(Self {
            sessions: n,
            mean_latency_ms: m[0],
            mean_refinement_latency_ms: m[1],
            mean_energy_j: m[2],
            mean_refinement_energy_j: m[3],
            mean_gain_linear: m[4],
            mean_gain_db: m[5],
        })
    }
}

/// 5G-BM versus CVBM comparison. CVBM statistics include fallback sessions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub five_g_bm: Option<SchemeStats>,
    pub cvbm: Option<SchemeStats>,
    /// Fraction of CVBM sessions that fell back to CSI-RS refinement.
    pub cvbm_fallback_rate: f64,
    /// `1 - refinement latency (CVBM) / refinement latency (5G-BM)`.
    pub overhead_reduction: Option<f64>,
    /// Same ratio with the shared SSB burst included in both latencies.
    pub overhead_reduction_with_burst: Option<f64>,
    /// `1 - refinement energy (CVBM) / refinement energy (5G-BM)`.
    pub energy_reduction: Option<f64>,
    /// `mean linear gain (CVBM) / mean linear gain (5G-BM) - 1`.
    pub gain_improvement: Option<f64>,
}

pub fn ledger_summary(sessions: &[BeamSession]) -> Result<Summary, ProtocolError> {
    if sessions.is_empty() {
        return Err(ProtocolError::EmptyInput);
    }
    let five_g_bm = SchemeStats::from_sessions(sessions.iter().filter(|s| !s.strategy.is_cvbm_scheme()));
    let cvbm = SchemeStats::from_sessions(sessions.iter().filter(|s| s.strategy.is_cvbm_scheme()));
    let fallbacks = sessions.iter().filter(|s| s.strategy == Strategy::CvbmFallback).count();
    let cvbm_fallback_rate = cvbm.map_or(0.0, |c| fallbacks as f64 / c.sessions as f64);
    let ratio = |f: fn(&SchemeStats) -> f64| match (&five_g_bm, &cvbm) {
        (Some(a), Some(b)) if f(a) > 0.0 => Some(f(b) / f(a)),
        _ => None,
    };
    Ok(Summary {
        five_g_bm,
        cvbm,
        cvbm_fallback_rate,
        overhead_reduction: ratio(|s| s.mean_refinement_latency_ms).map(|r| 1.0 - r),
        overhead_reduction_with_burst: ratio(|s| s.mean_latency_ms).map(|r| 1.0 - r),
        energy_reduction: ratio(|s| s.mean_refinement_energy_j).map(|r| 1.0 - r),
        gain_improvement: ratio(|s| s.mean_gain_linear).map(|r| r - 1.0),
    })
}

/// One JSON-lines record per session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cell: Option<usize>,
    pub strategy: Strategy,
    pub ssb_index: usize,
    pub codeword_index: Option<usize>,
    pub theta_deg: Option<f64>,
    pub phi_deg: Option<f64>,
    pub gain_db: f64,
    pub latency_ms: f64,
    pub energy_j: f64,
}

impl SessionTrace {
    pub fn from_session(session: &BeamSession, cell: Option<usize>) -> Self {
        let pointing = session.chosen_beam.pointing;
        Self {
            cell,
            strategy: session.strategy,
            ssb_index: session.ssb_index,
            codeword_index: session.codeword_index,
            theta_deg: pointing.map(|(t, _)| t.to_degrees()),
            phi_deg: pointing.map(|(_, p)| p.to_degrees()),
            gain_db: session.effective_gain_db(),
            latency_ms: session.ledger.total_latency_ms(),
            energy_j: session.ledger.total_energy_j(),
        }
    }
}

pub fn write_session_traces<W: Write>(mut out: W, traces: &[SessionTrace]) -> io::Result<()> {
    for t in traces {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
