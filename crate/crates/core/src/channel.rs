//! Line-of-sight THz link budget, from path loss to achievable rate.
//!
//! Range-based transmit power control sits here as well.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::array::{self, ArrayError, ArrayGeometry, BeamWeights};
use crate::geometry::SphericalPoint;

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Reported RSRP when the beamformed amplitude is exactly zero.
pub const RSRP_FLOOR_DBM: f64 = -300.0;

/// Path-loss distances below this are evaluated here.
pub const MIN_PATHLOSS_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Array(#[from] ArrayError),
}

/// Link-level constants. Powers in dBm, frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm_max: f64,
    /// Lower bound applied by power control.
    pub tx_power_dbm_min: f64,
    pub noise_figure_db: f64,
    /// RSRP that power control aims for.
    pub target_rsrp_dbm: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            carrier_hz: 1.0e11,
            bandwidth_hz: 1.0e9,
            tx_power_dbm_max: 30.0,
            tx_power_dbm_min: -30.0,
            noise_figure_db: 7.0,
            // 20 dB SNR at the default noise floor.
            target_rsrp_dbm: -57.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let pos = |v: f64, name: &str| -> Result<(), ChannelError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ChannelError::Domain(format!("{name} must be finite and > 0")))
            }
        };
        pos(self.carrier_hz, "link.carrier_hz")?;
        pos(self.bandwidth_hz, "link.bandwidth_hz")?;
        for (v, name) in [
            (self.tx_power_dbm_max, "link.tx_power_dbm_max"),
            (self.tx_power_dbm_min, "link.tx_power_dbm_min"),
            (self.noise_figure_db, "link.noise_figure_db"),
            (self.target_rsrp_dbm, "link.target_rsrp_dbm"),
        ] {
            if !v.is_finite() {
                return Err(ChannelError::Domain(format!("{name} must be finite")));
            }
        }
        if self.tx_power_dbm_min > self.tx_power_dbm_max {
            return Err(ChannelError::Domain("link.tx_power_dbm_min must be <= link.tx_power_dbm_max".into()));
        }
        Ok(())
    }

    /// `-174 + 10 log10(BW) + NF`, dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_PER_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }
}

/// InH-Office LoS path loss, `32.4 + 17.3 log10(d) + 20 log10(f_GHz)` dB,
/// with `d` clamped to at least 1 m.
pub fn pathloss_inh_los(distance_m: f64, carrier_hz: f64) -> Result<f64, ChannelError> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(ChannelError::Domain(format!("distance {distance_m} m must be finite and > 0")));
    }
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(ChannelError::Domain(format!("carrier {carrier_hz} Hz must be finite and > 0")));
    }
    let d = distance_m.max(MIN_PATHLOSS_DISTANCE_M);
    Ok(32.4 + 17.3 * d.log10() + 20.0 * (carrier_hz / 1e9).log10())
}

/// Rank-1 LoS channel between a BS array and a mobile array.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Row-major `n_r x n_t`.
    pub matrix: Vec<Complex64>,
    pub n_r: usize,
    pub n_t: usize,
    pub aod: SphericalPoint,
    pub aoa: SphericalPoint,
    pub pathloss_db: f64,
}

impl ChannelRealization {
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.n_t + col]
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.matrix.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// `H = sqrt(N_t N_r 10^(-PL/10)) * a_r(aoa)/sqrt(N_r) * a_t(aod)^H/sqrt(N_t)`.
///
/// The mobile's array faces the BS, so the arrival direction is the mobile
/// boresight.
pub fn los_channel(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    mobile: &SphericalPoint,
    budget: &LinkBudget,
) -> Result<ChannelRealization, ChannelError> {
    let pathloss_db = pathloss_inh_los(mobile.r, budget.carrier_hz)?;
    let aod = *mobile;
    let aoa = SphericalPoint { r: mobile.r, theta: 0.0, phi: 0.0 };
    let a_t = array::steering_vector_upa(tx, aod.theta, aod.phi)?;
    let a_r = array::steering_vector_upa(rx, aoa.theta, aoa.phi)?;
    let (n_t, n_r) = (tx.num_elements(), rx.num_elements());
    // sqrt(N_t N_r PL) / sqrt(N_t N_r) leaves the amplitude path gain.
    let amplitude = 10f64.powf(-pathloss_db / 20.0);
    let matrix =
        a_r.weights().iter().flat_map(|&r| a_t.weights().iter().map(move |&t| r * t.conj() * amplitude)).collect();
    Ok(ChannelRealization { matrix, n_r, n_t, aod, aoa, pathloss_db })
}

/// Beamformed amplitude `v^H H w` with both vectors scaled to unit norm.
pub fn beamformed_amplitude(
    h: &ChannelRealization,
    tx_beam: &BeamWeights,
    rx_combiner: &BeamWeights,
) -> Result<Complex64, ChannelError> {
    if tx_beam.len() != h.n_t {
        return Err(ChannelError::DimensionMismatch(format!(
            "tx beam has {} weights, channel has {} tx antennas",
            tx_beam.len(),
            h.n_t
        )));
    }
    if rx_combiner.len() != h.n_r {
        return Err(ChannelError::DimensionMismatch(format!(
            "rx combiner has {} weights, channel has {} rx antennas",
            rx_combiner.len(),
            h.n_r
        )));
    }
    let w = tx_beam.weights();
    let v = rx_combiner.weights();
    let scale = ((h.n_t * h.n_r) as f64).sqrt();
    let y: Complex64 = h
        .matrix
        .chunks_exact(h.n_t)
        .zip(v)
        .map(|(row, vi)| vi.conj() * row.iter().zip(w).map(|(hij, wj)| hij * wj).sum::<Complex64>())
        .sum();
    Ok(y / scale)
}

/// `P_tx + 20 log10 |v^H H w|`, floored at [`RSRP_FLOOR_DBM`].
pub fn rsrp(
    h: &ChannelRealization,
    tx_beam: &BeamWeights,
    rx_combiner: &BeamWeights,
    tx_power_dbm: f64,
) -> Result<f64, ChannelError> {
    let amp = beamformed_amplitude(h, tx_beam, rx_combiner)?.norm();
    if amp == 0.0 {
        return Ok(RSRP_FLOOR_DBM);
    }
    Ok((tx_power_dbm + 20.0 * amp.log10()).max(RSRP_FLOOR_DBM))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkQuality {
    pub snr_db: f64,
    pub rate_bps: f64,
}

/// Shannon rate `BW log2(1 + SNR)` at the budget's noise floor.
pub fn snr_and_rate(rsrp_dbm: f64, budget: &LinkBudget) -> LinkQuality {
    let snr_db = rsrp_dbm - budget.noise_power_dbm();
    let snr = 10f64.powf(snr_db / 10.0);
    LinkQuality { snr_db, rate_bps: budget.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2 }
}

/// Minimal transmit power reaching `target_rsrp_dbm` at the estimated range
/// with beamforming gain `gain_linear`, clamped to the budget's power range.
pub fn power_control(
    estimated_range_m: f64,
    target_rsrp_dbm: f64,
    budget: &LinkBudget,
    gain_linear: f64,
) -> Result<f64, ChannelError> {
    if !(estimated_range_m.is_finite() && estimated_range_m > 0.0) {
        return Err(ChannelError::Domain(format!("estimated range {estimated_range_m} m must be > 0")));
    }
    if !(gain_linear.is_finite() && gain_linear > 0.0) {
        return Err(ChannelError::Domain(format!("beamforming gain {gain_linear} must be > 0")));
    }
    let pl = pathloss_inh_los(estimated_range_m, budget.carrier_hz)?;
    let needed = target_rsrp_dbm + pl - 10.0 * gain_linear.log10();
    Ok(needed.clamp(budget.tx_power_dbm_min, budget.tx_power_dbm_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{dft_codebook_upa, steering_vector_upa};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bs() -> ArrayGeometry {
        ArrayGeometry::upa(8, 8)
    }
    fn ue() -> ArrayGeometry {
        ArrayGeometry::upa(2, 2)
    }
    fn boresight_rx() -> BeamWeights {
        steering_vector_upa(&ue(), 0.0, 0.0).unwrap()
    }

    #[test]
    fn pathloss_examples() {
        assert_relative_eq!(pathloss_inh_los(1.0, 1e11).unwrap(), 72.4, epsilon = 1e-12);
        assert_relative_eq!(pathloss_inh_los(10.0, 1e11).unwrap(), 89.7, epsilon = 1e-12);
        let d = pathloss_inh_los(20.0, 1e11).unwrap() - pathloss_inh_los(10.0, 1e11).unwrap();
        assert_relative_eq!(d, 5.207_818_924_986_875, epsilon = 1e-12);
    }

    #[test]
    fn pathloss_clamps_and_rejects() {
        assert_eq!(pathloss_inh_los(0.3, 1e11).unwrap(), pathloss_inh_los(1.0, 1e11).unwrap());
        assert!(pathloss_inh_los(0.0, 1e11).is_err());
        assert!(pathloss_inh_los(-1.0, 1e11).is_err());
        assert!(pathloss_inh_los(5.0, 0.0).is_err());
        assert!(pathloss_inh_los(5.0, 2e11).unwrap() > pathloss_inh_los(5.0, 1e11).unwrap());
    }

    #[test]
    fn boresight_rsrp_link_budget() {
        let budget = LinkBudget::default();
        let mobile = SphericalPoint { r: 10.0, theta: 0.0, phi: 0.0 };
        let h = los_channel(&bs(), &ue(), &mobile, &budget).unwrap();
        let w = steering_vector_upa(&bs(), 0.0, 0.0).unwrap();
        let p = rsrp(&h, &w, &boresight_rx(), budget.tx_power_dbm_max).unwrap();
        assert_relative_eq!(p, -35.617_600_346_881_5, epsilon = 1e-9);
    }

    #[test]
    fn aligned_power_is_rank_one_gain() {
        let budget = LinkBudget::default();
        let mobile = SphericalPoint { r: 7.3, theta: 0.61, phi: -2.2 };
        let h = los_channel(&bs(), &ue(), &mobile, &budget).unwrap();
        let pl_lin = 10f64.powf(-h.pathloss_db / 10.0);
        assert_relative_eq!(h.frobenius_norm_sqr(), 256.0 * pl_lin, max_relative = 1e-9);
        let w = steering_vector_upa(&bs(), mobile.theta, mobile.phi).unwrap();
        let amp = beamformed_amplitude(&h, &w, &boresight_rx()).unwrap();
        assert_relative_eq!(amp.norm_sqr(), 256.0 * pl_lin, max_relative = 1e-9);
        let p = rsrp(&h, &w, &boresight_rx(), 30.0).unwrap();
        assert_relative_eq!(p, 30.0 + 10.0 * 256f64.log10() - h.pathloss_db, epsilon = 1e-9);
    }

    #[test]
    fn null_direction_hits_floor() {
        let budget = LinkBudget::default();
        let mobile = SphericalPoint { r: 4.0, theta: 0.0, phi: 0.0 };
        let h = los_channel(&bs(), &ue(), &mobile, &budget).unwrap();
        let cb = dft_codebook_upa(&bs(), 1, 1).unwrap();
        let i = cb.grid().iter().position(|&g| g == (0.25, 0.0)).unwrap();
        let p = rsrp(&h, cb.codeword(i), &boresight_rx(), 30.0).unwrap();
        assert!(p < -200.0);
        let zero = ChannelRealization { matrix: vec![Complex64::new(0.0, 0.0); 256], ..h };
        let w = steering_vector_upa(&bs(), 0.0, 0.0).unwrap();
        assert_eq!(rsrp(&zero, &w, &boresight_rx(), 30.0).unwrap(), RSRP_FLOOR_DBM);
    }

    #[test]
    fn rsrp_is_linear_in_power() {
        let budget = LinkBudget::default();
        let mobile = SphericalPoint { r: 12.0, theta: 0.3, phi: 0.4 };
        let h = los_channel(&bs(), &ue(), &mobile, &budget).unwrap();
        let w = steering_vector_upa(&bs(), 0.31, 0.4).unwrap();
        let full = rsrp(&h, &w, &boresight_rx(), 30.0).unwrap();
        let half = rsrp(&h, &w, &boresight_rx(), 30.0 + 10.0 * 0.5f64.log10()).unwrap();
        assert_relative_eq!(full - half, 3.010_299_956_639_812, epsilon = 1e-9);
    }

    #[test]
    fn rsrp_dimension_mismatch() {
        let budget = LinkBudget::default();
        let mobile = SphericalPoint { r: 12.0, theta: 0.0, phi: 0.0 };
        let h = los_channel(&bs(), &ue(), &mobile, &budget).unwrap();
        let w = steering_vector_upa(&ue(), 0.0, 0.0).unwrap();
        assert!(matches!(rsrp(&h, &w, &boresight_rx(), 30.0), Err(ChannelError::DimensionMismatch(_))));
    }

    #[test]
    fn noise_and_rate_examples() {
        let b = LinkBudget::default();
        assert_relative_eq!(b.noise_power_dbm(), -77.0, epsilon = 1e-12);
        let q = snr_and_rate(-77.0, &b);
        assert_relative_eq!(q.snr_db, 0.0, epsilon = 1e-12);
        assert_relative_eq!(q.rate_bps, 1e9, max_relative = 1e-12);
        let q = snr_and_rate(RSRP_FLOOR_DBM, &b);
        // SNR of -223 dB: positive but negligible.
        assert!(q.rate_bps > 0.0 && q.rate_bps < 1e-12);
    }

    #[test]
    fn power_control_examples() {
        let b = LinkBudget::default();
        let p = power_control(10.0, -35.617_600_346_881_5, &b, 256.0).unwrap();
        assert_relative_eq!(p, 30.0, epsilon = 1e-9);
        // Above the cap stays at the cap.
        assert_eq!(power_control(10.0, -20.0, &b, 256.0).unwrap(), 30.0);
        let a = power_control(5.0, -60.0, &b, 256.0).unwrap();
        let c = power_control(10.0, -60.0, &b, 256.0).unwrap();
        assert_relative_eq!(c - a, 5.207_818_924_986_875, epsilon = 1e-9);
        assert_eq!(power_control(1.0, -200.0, &b, 256.0).unwrap(), b.tx_power_dbm_min);
        assert!(power_control(0.0, -60.0, &b, 256.0).is_err());
    }

    #[test]
    fn orthonormal_codebook_captures_all_energy() {
        let budget = LinkBudget::default();
        let mobile = SphericalPoint { r: 6.0, theta: 0.44, phi: 1.9 };
        let h = los_channel(&bs(), &ue(), &mobile, &budget).unwrap();
        let cb = dft_codebook_upa(&bs(), 1, 1).unwrap();
        let rx = boresight_rx();
        let total: f64 = cb.codewords().iter().map(|w| beamformed_amplitude(&h, w, &rx).unwrap().norm_sqr()).sum();
        // ||v^H H||^2 with v = a_r / sqrt(N_r)
        let vh: Vec<Complex64> = (0..h.n_t)
            .map(|j| (0..h.n_r).map(|i| rx.weights()[i].conj() * h.entry(i, j)).sum::<Complex64>() / 2.0)
            .collect();
        let expect: f64 = vh.iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(total, expect, max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn power_control_inverts_rsrp(r in 1.0f64..30.0, theta in 0.0f64..1.4, phi in -3.1f64..3.1, target in -90.0f64..-40.0) {
            let b = LinkBudget { tx_power_dbm_min: -100.0, tx_power_dbm_max: 100.0, ..Default::default() };
            let mobile = SphericalPoint { r, theta, phi };
            let h = los_channel(&bs(), &ue(), &mobile, &b).unwrap();
            let w = steering_vector_upa(&bs(), theta, phi).unwrap();
            let p = power_control(r, target, &b, 256.0).unwrap();
            let got = rsrp(&h, &w, &boresight_rx(), p).unwrap();
            prop_assert!((got - target).abs() < 1e-9);
        }

        #[test]
        fn rate_monotone_in_rsrp(a in -150.0f64..0.0, b in -150.0f64..0.0) {
            let budget = LinkBudget::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (ql, qh) = (snr_and_rate(lo, &budget), snr_and_rate(hi, &budget));
            prop_assert!(ql.rate_bps >= 0.0);
            prop_assert!(ql.rate_bps <= qh.rate_bps);
        }

        #[test]
        fn rsrp_non_increasing_in_distance(d1 in 0.5f64..40.0, d2 in 0.5f64..40.0, theta in 0.0f64..1.4) {
            let budget = LinkBudget::default();
            let w = steering_vector_upa(&bs(), 0.2, 0.0).unwrap();
            let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let at = |r| {
                let h = los_channel(&bs(), &ue(), &SphericalPoint { r, theta, phi: 0.0 }, &budget).unwrap();
                rsrp(&h, &w, &boresight_rx(), 30.0).unwrap()
            };
            prop_assert!(at(near) >= at(far) - 1e-9);
        }
    }
}
