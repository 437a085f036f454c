//! Experiment configuration.
//!
//! The file format is TOML: one table per subsystem, every key optional.
//! Missing keys take their defaults, unknown keys are rejected by name.
//!
//! ```toml
//! seed = 1
//!
//! [area]
//! width_m = 20.0          # lateral extent, BS at the midpoint of the near edge
//! depth_m = 20.0          # extent along the BS boresight
//! grid_resolution = 100   # grid points per axis (cell centers)
//! height_offset_m = 0.0   # user height minus BS height
//!
//! [link]                  # Hz, dBm, dB
//! carrier_hz = 1.0e11
//! bandwidth_hz = 1.0e9
//! tx_power_dbm_max = 30.0
//! tx_power_dbm_min = -30.0
//! noise_figure_db = 7.0
//! target_rsrp_dbm = -57.0
//!
//! [array]
//! bs_n_h = 8
//! bs_n_v = 8
//! ue_n_h = 2
//! ue_n_v = 2
//! spacing_wavelengths = 0.5
//! oversampling_h = 2
//! oversampling_v = 2
//!
//! [ssb]                   # degrees, ms
//! n_az = 8
//! n_el = 4
//! az_span_deg = 360.0
//! el_span_deg = 180.0
//! az_start_deg = -180.0
//! el_start_deg = -90.0
//! burst_ms = 5.0
//! period_ms = 20.0
//!
//! [protocol]              # ms, W
//! csi_rs_period_ms = 10.0
//! csi_rs_beams_per_round = 4
//! refinement_ms = 30.0
//! cvbm_inference_ms = 15.8
//! power_5gbm_w = 20.0
//! power_cvbm_w = 10.0
//!
//! [noise]
//! angle_error_std_deg = 0.23
//! distance_error_std_cm = 3.74
//! detection_success_prob = 0.9067
//!
//! [camera]                # pixels
//! focal_length_px = 1380.0
//! principal_point = [960.0, 540.0]
//! image_size = [1920, 1080]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::array::{dft_codebook_upa, ArrayGeometry, Codebook};
use crate::channel::LinkBudget;
use crate::geometry::{CameraIntrinsics, LocalizationNoiseModel};
use crate::protocol::{ProtocolConfig, SsbGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaConfig {
    pub width_m: f64,
    pub depth_m: f64,
    pub grid_resolution: usize,
    pub height_offset_m: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self { width_m: 20.0, depth_m: 20.0, grid_resolution: 100, height_offset_m: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub bs_n_h: usize,
    pub bs_n_v: usize,
    pub ue_n_h: usize,
    pub ue_n_v: usize,
    pub spacing_wavelengths: f64,
    pub oversampling_h: usize,
    pub oversampling_v: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            bs_n_h: 8,
            bs_n_v: 8,
            ue_n_h: 2,
            ue_n_v: 2,
            spacing_wavelengths: 0.5,
            oversampling_h: 2,
            oversampling_v: 2,
        }
    }
}

impl ArrayConfig {
    pub fn bs(&self) -> ArrayGeometry {
        ArrayGeometry { n_h: self.bs_n_h, n_v: self.bs_n_v, spacing_wavelengths: self.spacing_wavelengths }
    }

    pub fn ue(&self) -> ArrayGeometry {
        ArrayGeometry { n_h: self.ue_n_h, n_v: self.ue_n_v, spacing_wavelengths: self.spacing_wavelengths }
    }

    pub fn codebook(&self) -> Result<Codebook, HarnessError> {
        Ok(dft_codebook_upa(&self.bs(), self.oversampling_h, self.oversampling_v)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub area: AreaConfig,
    pub link: LinkBudget,
    pub array: ArrayConfig,
    pub ssb: SsbGrid,
    pub protocol: ProtocolConfig,
    pub noise: LocalizationNoiseModel,
    pub camera: CameraIntrinsics,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            area: AreaConfig::default(),
            link: LinkBudget::default(),
            array: ArrayConfig::default(),
            ssb: SsbGrid::default(),
            protocol: ProtocolConfig::default(),
            noise: LocalizationNoiseModel::default(),
            camera: CameraIntrinsics::default(),
        }
    }
}

fn validation(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Validation(e.to_string())
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string().trim_end().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let a = &self.area;
        if a.grid_resolution < 2 {
            return Err(validation("area.grid_resolution must be >= 2"));
        }
        if !(a.width_m.is_finite() && a.width_m > 0.0 && a.depth_m.is_finite() && a.depth_m > 0.0) {
            return Err(validation("area.width_m and area.depth_m must be finite and > 0"));
        }
        if !a.height_offset_m.is_finite() {
            return Err(validation("area.height_offset_m must be finite"));
        }
        self.link.validate().map_err(validation)?;
        self.array.bs().validate().map_err(|e| validation(format!("array (BS): {e}")))?;
        self.array.ue().validate().map_err(|e| validation(format!("array (UE): {e}")))?;
        if self.array.oversampling_h == 0 || self.array.oversampling_v == 0 {
            return Err(validation("array.oversampling_h and array.oversampling_v must be >= 1"));
        }
        self.ssb.validate().map_err(validation)?;
        self.protocol.validate().map_err(validation)?;
        self.noise.validate().map_err(|e| validation(format!("noise: {e}")))?;
        self.camera.validate().map_err(|e| validation(format!("camera: {e}")))?;
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    ExperimentConfig::from_toml_str(&text).map_err(|e| match e {
        HarnessError::Parse(msg) => HarnessError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
